use serde_json::json;

use super::HypothesisSpace;
use crate::error::{Error, Result};
use crate::protocol::{Answer, ComponentIndex, HypothesisId, QueryDistribution, QueryId};

/// Lower-bound construction with `⌊ℓ/(2ε)⌋` uniformly weighted queries, the first
/// `ℓ` of which form the "rare" set. A hypothesis is zero outside the rare set and
/// has at most one 1 per rare query.
///
/// Hypothesis ids are mixed-radix numbers in base `c + 1`: digit `q` (for rare
/// query `q`) is 0 when the query is all zeros and `j + 1` when component `j` is 1.
/// The all-zero target is therefore id 0.
#[derive(Debug, Clone)]
pub struct SparseComponentSpace {
    rare: usize,
    components: usize,
    epsilon: f64,
    total: usize,
    distribution: QueryDistribution,
    /// Positional values `(j+1)/c`, so value-ordered experts apply.
    positions: Vec<f64>,
}

impl SparseComponentSpace {
    pub fn new(rare: usize, components: usize, epsilon: f64, cap: usize) -> Result<Self> {
        if rare == 0 || components == 0 {
            return Err(Error::MalformedSpec("l and c must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::MalformedSpec(format!(
                "sparse space needs 0 < epsilon < 1/2, got {epsilon}"
            )));
        }
        // Ratios that should be integral can land a few ulps low.
        let total = (rare as f64 / (2.0 * epsilon) + 1e-9).floor() as usize;
        if total < rare {
            return Err(Error::MalformedSpec(format!(
                "floor(l/(2 eps)) = {total} is smaller than l = {rare}"
            )));
        }
        let size = (components as u128 + 1)
            .checked_pow(rare as u32)
            .unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::BudgetExceeded { size, cap });
        }
        Ok(Self {
            rare,
            components,
            epsilon,
            total,
            distribution: QueryDistribution::uniform(total)?,
            positions: (1..=components)
                .map(|j| j as f64 / components as f64)
                .collect(),
        })
    }

    pub fn rare_queries(&self) -> usize {
        self.rare
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Which component of rare query `q` carries the 1, if any.
    pub fn marked_component(&self, h: HypothesisId, q: QueryId) -> Option<ComponentIndex> {
        if q.0 >= self.rare {
            return None;
        }
        let base = self.components + 1;
        let digit = (h.0 / base.pow(q.0 as u32)) % base;
        digit.checked_sub(1).map(ComponentIndex)
    }

    /// Id of the hypothesis with the given per-rare-query marks.
    pub fn hypothesis_with(&self, marks: &[Option<usize>]) -> Result<HypothesisId> {
        if marks.len() != self.rare {
            return Err(Error::MalformedSpec(format!(
                "expected {} marks, got {}",
                self.rare,
                marks.len()
            )));
        }
        let base = self.components + 1;
        let mut id = 0;
        for m in marks.iter().rev() {
            let digit = match m {
                None => 0,
                Some(j) if *j < self.components => j + 1,
                Some(j) => return Err(Error::InvalidComponent(*j, self.components)),
            };
            id = id * base + digit;
        }
        Ok(HypothesisId(id))
    }
}

impl HypothesisSpace for SparseComponentSpace {
    fn kind(&self) -> &'static str {
        "sparse"
    }

    fn describe(&self) -> String {
        format!(
            "sparse(l={}, c={}, eps={}, |Q|={})",
            self.rare, self.components, self.epsilon, self.total
        )
    }

    fn num_hypotheses(&self) -> usize {
        (self.components + 1).pow(self.rare as u32)
    }

    fn num_queries(&self) -> usize {
        self.total
    }

    fn components(&self) -> usize {
        self.components
    }

    fn alphabet_size(&self) -> usize {
        2
    }

    fn distribution(&self) -> &QueryDistribution {
        &self.distribution
    }

    fn answer(&self, h: HypothesisId, q: QueryId, j: ComponentIndex) -> Answer {
        Answer(u8::from(self.marked_component(h, q) == Some(j)))
    }

    fn default_target(&self) -> HypothesisId {
        HypothesisId(0)
    }

    fn render_hypothesis(&self, h: HypothesisId) -> String {
        let marks: Vec<String> = (0..self.rare)
            .map(|q| match self.marked_component(h, QueryId(q)) {
                Some(j) => j.0.to_string(),
                None => "-".into(),
            })
            .collect();
        format!("marks[{}]", marks.join(","))
    }

    fn component_values(&self, _q: QueryId) -> Option<&[f64]> {
        Some(&self.positions)
    }

    fn query_payload(&self, q: QueryId) -> serde_json::Value {
        json!({ "query": q.0, "rare": q.0 < self.rare })
    }
}
