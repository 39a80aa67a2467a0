use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GridThresholdSpace, HypothesisSpace, SparseComponentSpace, TripletTreeSpace};
use crate::error::{Error, Result};
use crate::protocol::HypothesisId;

pub const DEFAULT_HYPOTHESIS_CAP: usize = 1_000_000;

fn default_pool() -> usize {
    512
}

/// Declarative description of a space, readable from TOML/JSON config or from
/// the shorthand `kind:key=value,...` form (`grid:M=100,c=4`, `triplet:n=4,m=4`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    /// Grid thresholds. Without explicit `queries`, a seeded pool of uniform queries.
    Grid {
        #[serde(rename = "M", alias = "grid")]
        grid: usize,
        c: usize,
        #[serde(default = "default_pool")]
        pool: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        queries: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// The repeated single query `(1/c, ..., 1)`.
    Single { c: usize },
    TwoPoint {
        c: usize,
        #[serde(alias = "eps")]
        epsilon: f64,
    },
    Sparse {
        #[serde(alias = "ell")]
        l: usize,
        c: usize,
        #[serde(alias = "eps")]
        epsilon: f64,
    },
    Triplet {
        n: usize,
        m: usize,
        /// Target tree, as a Newick string or a hypothesis index.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
    },
}

impl SpaceSpec {
    pub fn build(&self) -> Result<Arc<dyn HypothesisSpace>> {
        self.build_with_cap(DEFAULT_HYPOTHESIS_CAP)
    }

    pub fn build_with_cap(&self, cap: usize) -> Result<Arc<dyn HypothesisSpace>> {
        let check = |size: usize| {
            if size > cap {
                Err(Error::BudgetExceeded {
                    size: size as u128,
                    cap,
                })
            } else {
                Ok(())
            }
        };
        Ok(match self {
            SpaceSpec::Grid {
                grid,
                c,
                pool,
                seed,
                queries,
                weights,
            } => {
                check(grid + 1)?;
                match queries {
                    Some(qs) => {
                        if qs.iter().any(|q| q.len() != *c) {
                            return Err(Error::MalformedSpec(format!(
                                "every explicit query must have c = {c} points"
                            )));
                        }
                        let w = weights
                            .clone()
                            .unwrap_or_else(|| vec![1.0 / qs.len().max(1) as f64; qs.len()]);
                        Arc::new(GridThresholdSpace::new(*grid, qs.clone(), w)?)
                    }
                    None => Arc::new(GridThresholdSpace::uniform_pool(*grid, *c, *pool, *seed)?),
                }
            }
            SpaceSpec::Single { c } => {
                check(c + 1)?;
                Arc::new(GridThresholdSpace::single_query(*c)?)
            }
            SpaceSpec::TwoPoint { c, epsilon } => {
                check(2 * c + 1)?;
                Arc::new(GridThresholdSpace::two_point(*c, *epsilon)?)
            }
            SpaceSpec::Sparse { l, c, epsilon } => {
                Arc::new(SparseComponentSpace::new(*l, *c, *epsilon, cap)?)
            }
            SpaceSpec::Triplet { n, m, target } => {
                let space = TripletTreeSpace::new(*n, *m, cap)?;
                let space = match target.as_deref() {
                    None => space,
                    Some(t) => match t.trim().parse::<usize>() {
                        Ok(i) => space.with_target(HypothesisId(i))?,
                        Err(_) => space.with_target_newick(t)?,
                    },
                };
                Arc::new(space)
            }
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::MalformedSpec(e.to_string()))
    }

    /// Accepts either a table or the `kind:key=value` shorthand; for use with
    /// `#[serde(deserialize_with)]`.
    pub fn deserialize_either<'de, D: serde::Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            Short(String),
            Full(SpaceSpec),
        }
        match Either::deserialize(d)? {
            Either::Short(s) => s.parse().map_err(serde::de::Error::custom),
            Either::Full(s) => Ok(s),
        }
    }
}

/// Splits on commas that are not inside parentheses, so Newick targets survive.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = std::collections::BTreeMap::new();
        for part in split_top_level(rest) {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::MalformedSpec(format!("expected key=value, got '{part}'")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take =
            |keys: &[&str]| -> Option<String> { keys.iter().find_map(|k| kv.remove(*k)) };
        fn num<T: FromStr>(key: &str, v: Option<String>) -> Result<T> {
            let v = v.ok_or_else(|| Error::MalformedSpec(format!("missing {key}")))?;
            v.parse()
                .map_err(|_| Error::MalformedSpec(format!("bad value for {key}: '{v}'")))
        }
        let spec = match kind.trim() {
            "grid" => SpaceSpec::Grid {
                grid: num("M", take(&["M", "grid"]))?,
                c: num("c", take(&["c"]))?,
                pool: take(&["pool"])
                    .map(|v| num("pool", Some(v)))
                    .transpose()?
                    .unwrap_or_else(default_pool),
                seed: take(&["seed"])
                    .map(|v| num("seed", Some(v)))
                    .transpose()?
                    .unwrap_or(0),
                queries: None,
                weights: None,
            },
            "single" => SpaceSpec::Single {
                c: num("c", take(&["c"]))?,
            },
            "two-point" | "two_point" | "twopoint" => SpaceSpec::TwoPoint {
                c: num("c", take(&["c"]))?,
                epsilon: num("eps", take(&["eps", "epsilon"]))?,
            },
            "sparse" => SpaceSpec::Sparse {
                l: num("l", take(&["l", "ell"]))?,
                c: num("c", take(&["c"]))?,
                epsilon: num("eps", take(&["eps", "epsilon"]))?,
            },
            "triplet" => SpaceSpec::Triplet {
                n: num("n", take(&["n"]))?,
                m: num("m", take(&["m"]))?,
                target: take(&["target"]),
            },
            other => {
                return Err(Error::MalformedSpec(format!(
                    "unknown space kind '{other}'"
                )))
            }
        };
        if let Some(k) = kv.keys().next() {
            return Err(Error::MalformedSpec(format!(
                "unknown key '{k}' for {kind}"
            )));
        }
        Ok(spec)
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Grid {
                grid,
                c,
                pool,
                seed,
                queries,
                ..
            } => match queries {
                Some(q) => write!(f, "grid:M={grid},c={c},queries={}", q.len()),
                None => write!(f, "grid:M={grid},c={c},pool={pool},seed={seed}"),
            },
            SpaceSpec::Single { c } => write!(f, "single:c={c}"),
            SpaceSpec::TwoPoint { c, epsilon } => write!(f, "two-point:c={c},eps={epsilon}"),
            SpaceSpec::Sparse { l, c, epsilon } => write!(f, "sparse:l={l},c={c},eps={epsilon}"),
            SpaceSpec::Triplet { n, m, target } => match target {
                Some(t) => write!(f, "triplet:n={n},m={m},target={t}"),
                None => write!(f, "triplet:n={n},m={m}"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_forms() {
        let s: SpaceSpec = "triplet:n=4,m=4".parse().unwrap();
        let space = s.build().unwrap();
        assert_eq!((space.num_hypotheses(), space.components()), (15, 4));

        let s: SpaceSpec = "sparse:l=2,c=2,eps=0.25".parse().unwrap();
        let space = s.build().unwrap();
        assert_eq!((space.num_hypotheses(), space.num_queries()), (9, 4));

        let s: SpaceSpec = "grid:M=100,c=4".parse().unwrap();
        assert_eq!(s.build().unwrap().num_hypotheses(), 101);

        let s: SpaceSpec = "triplet:n=4,m=4,target=((a,c),(b,d))".parse().unwrap();
        let space = s.build().unwrap();
        assert_eq!(
            space.render_hypothesis(space.default_target()),
            "((a,c),(b,d));"
        );
    }

    #[test]
    fn shorthand_rejects_unknowns() {
        assert!("grid:M=10,c=2,bogus=1".parse::<SpaceSpec>().is_err());
        assert!("blob:c=2".parse::<SpaceSpec>().is_err());
        assert!("sparse:l=2,c=2".parse::<SpaceSpec>().is_err());
    }

    #[test]
    fn toml_config() {
        let s = SpaceSpec::from_toml(
            r#"
            kind = "grid"
            M = 4
            c = 2
            queries = [[0.5, 1.0], [0.1, 0.2]]
            weights = [0.25, 0.75]
            "#,
        )
        .unwrap();
        let space = s.build().unwrap();
        assert_eq!(space.num_queries(), 2);
        assert_eq!(space.num_hypotheses(), 5);
        let s = SpaceSpec::from_toml("kind = \"sparse\"\nl = 2\nc = 3\neps = 0.25\n").unwrap();
        assert_eq!(s.to_string(), "sparse:l=2,c=3,eps=0.25");
    }

    #[test]
    fn cap_is_enforced() {
        let s: SpaceSpec = "grid:M=100,c=2".parse().unwrap();
        assert!(matches!(
            s.build_with_cap(50),
            Err(Error::BudgetExceeded { .. })
        ));
        let s: SpaceSpec = "triplet:n=6,m=4".parse().unwrap();
        assert!(matches!(
            s.build_with_cap(100),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
