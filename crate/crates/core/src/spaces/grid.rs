use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::HypothesisSpace;
use crate::error::{Error, Result};
use crate::protocol::{Answer, ComponentIndex, HypothesisId, QueryDistribution, QueryId};

/// Thresholds `v = i/M` for `i = 0..=M` on `[0, 1]`; `h_v(x) = 1` iff `x > v`.
/// Hypothesis `i` is the threshold `i/M`, so ids are ordered by threshold and
/// `h_0` labels every point of `(0, 1]` with 1.
///
/// Queries are explicit `c`-tuples of points with a distribution over them.
#[derive(Debug, Clone)]
pub struct GridThresholdSpace {
    grid: usize,
    components: usize,
    queries: Vec<Vec<f64>>,
    distribution: QueryDistribution,
    label: String,
}

impl GridThresholdSpace {
    pub fn new(grid: usize, queries: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if grid == 0 {
            return Err(Error::MalformedSpec(
                "grid size M must be at least 1".into(),
            ));
        }
        let components = queries.first().map(Vec::len).unwrap_or(0);
        if components == 0 {
            return Err(Error::MalformedSpec(
                "queries need at least one component".into(),
            ));
        }
        if let Some(bad) = queries.iter().find(|q| q.len() != components) {
            return Err(Error::MalformedSpec(format!(
                "query {bad:?} has {} components, expected {components}",
                bad.len()
            )));
        }
        if queries.iter().flatten().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::MalformedSpec(
                "query points must lie in [0, 1]".into(),
            ));
        }
        if weights.len() != queries.len() {
            return Err(Error::MalformedSpec(format!(
                "{} queries but {} weights",
                queries.len(),
                weights.len()
            )));
        }
        let distribution = QueryDistribution::new(weights)?;
        Ok(Self {
            grid,
            components,
            queries,
            distribution,
            label: "grid".into(),
        })
    }

    /// Approximates the uniform product distribution on `[0,1]^c` with a fixed
    /// pool of i.i.d. uniform queries, drawn once from `seed`, under uniform weights.
    pub fn uniform_pool(grid: usize, components: usize, pool: usize, seed: u64) -> Result<Self> {
        if pool == 0 || components == 0 {
            return Err(Error::MalformedSpec("pool and c must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let queries = (0..pool)
            .map(|_| (0..components).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let mut space = Self::new(grid, queries, vec![1.0 / pool as f64; pool])?;
        space.label = format!("grid(M={grid}, c={components}, pool={pool}, seed={seed})");
        Ok(space)
    }

    /// One query `(1/c, 2/c, ..., 1)` with probability 1, on the grid `{0, 1/c, ..., 1}`.
    pub fn single_query(components: usize) -> Result<Self> {
        if components == 0 {
            return Err(Error::MalformedSpec("c must be positive".into()));
        }
        let q = (1..=components)
            .map(|i| i as f64 / components as f64)
            .collect();
        let mut space = Self::new(components, vec![q], vec![1.0])?;
        space.label = format!("single(c={components})");
        Ok(space)
    }

    /// Two queries: `(1/2c, ..., 1/2)` with probability `2ε` and
    /// `(1/2 + 1/2c, ..., 1)` with probability `1 - 2ε`, on the grid `{0, 1/2c, ..., 1}`.
    pub fn two_point(components: usize, epsilon: f64) -> Result<Self> {
        if components == 0 {
            return Err(Error::MalformedSpec("c must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::MalformedSpec(format!(
                "two-point space needs 0 < epsilon < 1/2, got {epsilon}"
            )));
        }
        let denom = (2 * components) as f64;
        let rare = (1..=components).map(|i| i as f64 / denom).collect();
        let common = (1..=components)
            .map(|i| (components + i) as f64 / denom)
            .collect();
        let weights = vec![2.0 * epsilon, 1.0 - 2.0 * epsilon];
        let mut space = Self::new(2 * components, vec![rare, common], weights)?;
        space.label = format!("two-point(c={components}, eps={epsilon})");
        Ok(space)
    }

    pub fn grid_size(&self) -> usize {
        self.grid
    }

    pub fn threshold_value(&self, h: HypothesisId) -> f64 {
        h.0 as f64 / self.grid as f64
    }

    pub fn points(&self, q: QueryId) -> &[f64] {
        &self.queries[q.0]
    }
}

impl HypothesisSpace for GridThresholdSpace {
    fn kind(&self) -> &'static str {
        "grid"
    }

    fn describe(&self) -> String {
        if self.label == "grid" {
            format!(
                "grid(M={}, c={}, |Q|={})",
                self.grid,
                self.components,
                self.queries.len()
            )
        } else {
            self.label.clone()
        }
    }

    fn num_hypotheses(&self) -> usize {
        self.grid + 1
    }

    fn num_queries(&self) -> usize {
        self.queries.len()
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
        Answer(u8::from(self.queries[q.0][j.0] > self.threshold_value(h)))
    }

    fn default_target(&self) -> HypothesisId {
        HypothesisId(0)
    }

    fn component_values(&self, q: QueryId) -> Option<&[f64]> {
        Some(&self.queries[q.0])
    }

    fn threshold(&self, h: HypothesisId) -> Option<f64> {
        Some(self.threshold_value(h))
    }

    fn render_hypothesis(&self, h: HypothesisId) -> String {
        format!("threshold {}", self.threshold_value(h))
    }

    fn render_component(&self, q: QueryId, j: ComponentIndex) -> String {
        format!("x={}", self.queries[q.0][j.0])
    }

    fn query_payload(&self, q: QueryId) -> serde_json::Value {
        json!({ "query": q.0, "points": self.queries[q.0] })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_is_strict() {
        let s = GridThresholdSpace::new(2, vec![vec![0.5, 1.0]], vec![1.0]).unwrap();
        assert_eq!(s.num_hypotheses(), 3);
        // v = 0.5 labels 0.5 as 0.
        assert_eq!(
            s.answer(HypothesisId(1), QueryId(0), ComponentIndex(0)),
            Answer(0)
        );
        assert_eq!(
            s.answer(HypothesisId(1), QueryId(0), ComponentIndex(1)),
            Answer(1)
        );
        assert_eq!(
            s.answer(HypothesisId(0), QueryId(0), ComponentIndex(0)),
            Answer(1)
        );
    }

    #[test]
    fn two_point_layout() {
        let s = GridThresholdSpace::two_point(4, 0.05).unwrap();
        assert_eq!(s.num_hypotheses(), 9);
        assert_eq!(s.points(QueryId(0)), &[0.125, 0.25, 0.375, 0.5]);
        assert_eq!(s.points(QueryId(1)), &[0.625, 0.75, 0.875, 1.0]);
        assert!((s.distribution().mass(QueryId(0)) - 0.1).abs() < 1e-15);
        assert!(s.points(QueryId(0)).iter().all(|&x| x <= 0.5));
    }

    #[test]
    fn pool_is_seeded() {
        let a = GridThresholdSpace::uniform_pool(10, 3, 20, 7).unwrap();
        let b = GridThresholdSpace::uniform_pool(10, 3, 20, 7).unwrap();
        let c = GridThresholdSpace::uniform_pool(10, 3, 20, 8).unwrap();
        assert_eq!(a.points(QueryId(5)), b.points(QueryId(5)));
        assert_ne!(a.points(QueryId(5)), c.points(QueryId(5)));
    }

    #[test]
    fn rejects_ragged_queries() {
        let e = GridThresholdSpace::new(4, vec![vec![0.1, 0.2], vec![0.3]], vec![0.5, 0.5]);
        assert!(matches!(e, Err(Error::MalformedSpec(_))));
    }
}
