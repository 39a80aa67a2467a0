//! Concrete finite hypothesis spaces.

mod grid;
mod sparse;
mod spec;
pub mod triplet;

use std::fmt;

use crate::protocol::{Answer, ComponentIndex, HypothesisId, QueryDistribution, QueryId};

pub use grid::GridThresholdSpace;
pub use sparse::SparseComponentSpace;
pub use spec::{SpaceSpec, DEFAULT_HYPOTHESIS_CAP};
pub use triplet::TripletTreeSpace;

/// A finite, fully enumerated family of hypotheses over a finite query set.
///
/// Implementations are immutable once built. `answer` is only called with ids
/// already checked against the reported sizes.
pub trait HypothesisSpace: fmt::Debug + Send + Sync {
    /// Short machine name, e.g. `grid` or `triplet`.
    fn kind(&self) -> &'static str;
    /// Human readable parameters, e.g. `grid(M=100, c=4, |Q|=512)`.
    fn describe(&self) -> String;

    fn num_hypotheses(&self) -> usize;
    fn num_queries(&self) -> usize;
    fn components(&self) -> usize;
    /// Number of distinct answer tokens; tokens are `0..alphabet_size`.
    fn alphabet_size(&self) -> usize;
    fn distribution(&self) -> &QueryDistribution;

    fn answer(&self, h: HypothesisId, q: QueryId, j: ComponentIndex) -> Answer;

    /// The target the space's constructions are stated against.
    fn default_target(&self) -> HypothesisId;

    /// Numeric value of each component of `q`, for spaces whose components are
    /// ordered points.
    fn component_values(&self, _q: QueryId) -> Option<&[f64]> {
        None
    }

    /// Threshold of `h`, for threshold spaces.
    fn threshold(&self, _h: HypothesisId) -> Option<f64> {
        None
    }

    fn render_hypothesis(&self, h: HypothesisId) -> String {
        h.to_string()
    }

    fn render_component(&self, _q: QueryId, j: ComponentIndex) -> String {
        format!("#{}", j.0)
    }

    fn render_answer(&self, _q: QueryId, _j: ComponentIndex, a: Answer) -> String {
        a.to_string()
    }

    /// What `h` shows on `q` as a whole, when there is a natural rendering
    /// (the restricted subtree for trees).
    fn render_display(&self, _h: HypothesisId, _q: QueryId) -> Option<String> {
        None
    }

    /// Looks a hypothesis up by its index or rendering.
    fn parse_hypothesis(&self, text: &str) -> Option<HypothesisId> {
        let i: usize = text.trim().parse().ok()?;
        (i < self.num_hypotheses()).then_some(HypothesisId(i))
    }

    /// Space-specific description of a query for display to a human.
    fn query_payload(&self, q: QueryId) -> serde_json::Value {
        serde_json::json!({ "query": q.0 })
    }
}
