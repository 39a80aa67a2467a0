//! Simulated experts: which wrong component gets corrected.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, VersionSpace};
use crate::protocol::{Answer, ComponentIndex, QueryId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    Accept,
    Correct(ComponentIndex),
}

/// What a policy may look at besides the query itself.
#[derive(Clone, Copy)]
pub struct ExpertContext<'a> {
    pub instance: &'a Instance,
    /// Current version space, for policies that react to it.
    pub version: Option<&'a VersionSpace>,
}

/// Fixed per-`(q, j)` weights. On a given display the weights of the incorrect
/// components are renormalized to a distribution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GammaTable {
    weights: HashMap<(QueryId, ComponentIndex), f64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct GammaRow {
    query: usize,
    component: usize,
    gamma: f64,
}

impl GammaTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, q: QueryId, j: ComponentIndex, gamma: f64) -> Result<()> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "gamma({}, {}) = {gamma}",
                q.0, j.0
            )));
        }
        self.weights.insert((q, j), gamma);
        Ok(())
    }

    pub fn get(&self, q: QueryId, j: ComponentIndex) -> f64 {
        self.weights.get(&(q, j)).copied().unwrap_or(0.0)
    }

    /// CSV with header `query,component,gamma`; missing pairs weigh 0.
    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        let mut table = Self::new();
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        for row in reader.deserialize::<GammaRow>() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            table.set(QueryId(row.query), ComponentIndex(row.component), row.gamma)?;
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExpertPolicy {
    /// Smallest-valued incorrect point.
    Smallest,
    /// Largest-valued incorrect point.
    Largest,
    /// Highest-valued point wrongly shown as 0, else as `Largest`.
    GlaringFlaw,
    /// Uniform over incorrect components.
    RandomIncorrect,
    /// The incorrect component whose correction removes the fewest hypotheses
    /// from the current version space.
    AdversarialMinShrink,
    GammaTable(GammaTable),
}

impl ExpertPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            ExpertPolicy::Smallest => "smallest",
            ExpertPolicy::Largest => "largest",
            ExpertPolicy::GlaringFlaw => "glaring-flaw",
            ExpertPolicy::RandomIncorrect => "random",
            ExpertPolicy::AdversarialMinShrink => "adversarial",
            ExpertPolicy::GammaTable(_) => "gamma-table",
        }
    }

    /// Whether the policy's choice never consumes randomness.
    pub fn is_deterministic(&self) -> bool {
        !matches!(
            self,
            ExpertPolicy::RandomIncorrect | ExpertPolicy::GammaTable(_)
        )
    }

    /// The exact distribution of `choose_feedback` over components, given that at
    /// least one component is wrong. Deterministic policies give a one-hot map.
    pub fn gamma_of(
        &self,
        ctx: &ExpertContext<'_>,
        q: QueryId,
        displayed: &[Answer],
        truth: &[Answer],
    ) -> Result<Vec<(ComponentIndex, f64)>> {
        if displayed.len() != truth.len() {
            return Err(Error::InvalidParameters(format!(
                "displayed has {} components, truth has {}",
                displayed.len(),
                truth.len()
            )));
        }
        let wrong: Vec<usize> = (0..displayed.len())
            .filter(|&j| displayed[j] != truth[j])
            .collect();
        if wrong.is_empty() {
            return Err(Error::InvalidParameters(
                "feedback distribution requested for a fully correct display".into(),
            ));
        }
        let one_hot = |j: usize| Ok(vec![(ComponentIndex(j), 1.0)]);
        match self {
            ExpertPolicy::Smallest | ExpertPolicy::Largest | ExpertPolicy::GlaringFlaw => {
                let values = ctx.instance.space().component_values(q).ok_or_else(|| {
                    Error::UnsupportedPolicy {
                        policy: self.name().into(),
                        reason: "components carry no numeric values".into(),
                    }
                })?;
                // Ties go to the lowest index: only strictly better values replace.
                let pick = |candidates: &[usize], largest: bool| -> Option<usize> {
                    candidates.iter().copied().reduce(|best, j| {
                        let better = if largest {
                            values[j] > values[best]
                        } else {
                            values[j] < values[best]
                        };
                        if better {
                            j
                        } else {
                            best
                        }
                    })
                };
                let j = match self {
                    ExpertPolicy::Smallest => pick(&wrong, false),
                    ExpertPolicy::Largest => pick(&wrong, true),
                    _ => {
                        let shown_zero: Vec<usize> = wrong
                            .iter()
                            .copied()
                            .filter(|&j| displayed[j] == Answer(0))
                            .collect();
                        pick(&shown_zero, true).or_else(|| pick(&wrong, true))
                    }
                };
                one_hot(j.expect("wrong is non-empty"))
            }
            ExpertPolicy::RandomIncorrect => {
                let p = 1.0 / wrong.len() as f64;
                Ok(wrong.into_iter().map(|j| (ComponentIndex(j), p)).collect())
            }
            ExpertPolicy::AdversarialMinShrink => {
                let full;
                let vs = match ctx.version {
                    Some(v) => v,
                    None => {
                        full = ctx.instance.full_version_space();
                        &full
                    }
                };
                let j = wrong
                    .iter()
                    .copied()
                    .min_by_key(|&j| {
                        (
                            vs.eliminated_by(ctx.instance, q, ComponentIndex(j), truth[j]),
                            j,
                        )
                    })
                    .expect("wrong is non-empty");
                one_hot(j)
            }
            ExpertPolicy::GammaTable(table) => {
                let total: f64 = wrong.iter().map(|&j| table.get(q, ComponentIndex(j))).sum();
                if total <= 0.0 {
                    return Err(Error::UnsupportedPolicy {
                        policy: self.name().into(),
                        reason: format!("no weight on any incorrect component of {q}"),
                    });
                }
                Ok(wrong
                    .into_iter()
                    .map(|j| (ComponentIndex(j), table.get(q, ComponentIndex(j)) / total))
                    .filter(|(_, g)| *g > 0.0)
                    .collect())
            }
        }
    }

    /// Accept iff nothing is wrong; otherwise one incorrect component drawn
    /// from `gamma_of`. One-hot choices consume no randomness.
    pub fn choose_feedback<R: Rng + ?Sized>(
        &self,
        ctx: &ExpertContext<'_>,
        q: QueryId,
        displayed: &[Answer],
        truth: &[Answer],
        rng: &mut R,
    ) -> Result<Feedback> {
        if displayed.len() != truth.len() {
            return Err(Error::InvalidParameters(
                "display and truth lengths differ".into(),
            ));
        }
        if displayed == truth {
            return Ok(Feedback::Accept);
        }
        let gamma = self.gamma_of(ctx, q, displayed, truth)?;
        if gamma.len() == 1 {
            return Ok(Feedback::Correct(gamma[0].0));
        }
        let pick = match self {
            ExpertPolicy::RandomIncorrect => rng.gen_range(0..gamma.len()),
            _ => WeightedIndex::new(gamma.iter().map(|(_, g)| *g))
                .map_err(|e| Error::InvalidParameters(e.to_string()))?
                .sample(rng),
        };
        Ok(Feedback::Correct(gamma[pick].0))
    }
}

impl fmt::Display for ExpertPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExpertPolicy {
    type Err = Error;

    /// Names of the built-in policies; gamma tables are loaded separately.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "smallest" => ExpertPolicy::Smallest,
            "largest" => ExpertPolicy::Largest,
            "glaring-flaw" | "glaring" | "glaringflaw" => ExpertPolicy::GlaringFlaw,
            "random" | "random-incorrect" => ExpertPolicy::RandomIncorrect,
            "adversarial" | "adversarial-min-shrink" | "min-shrink" => {
                ExpertPolicy::AdversarialMinShrink
            }
            other => {
                return Err(Error::InvalidParameters(format!(
                    "unknown expert policy '{other}'"
                )))
            }
        })
    }
}
