//! Simulation and audit laboratory for learning from partial corrections.
//!
//! A learner shows its answer on a randomly drawn query made of `c` atomic
//! components; an expert either accepts the whole answer or corrects a single
//! wrong component. This crate provides the interaction protocol, concrete
//! hypothesis spaces, simulated experts, learners, an auditor for the
//! effective sampling distribution, closed-form analytics, batch experiments,
//! and the session model behind the interactive service.

pub mod analytics;
pub mod auditor;
pub mod error;
pub mod experiments;
pub mod experts;
pub mod instance;
pub mod learners;
pub mod output;
pub mod protocol;
pub mod session;
pub mod spaces;

pub use error::{Error, Result};
pub use experts::{ExpertContext, ExpertPolicy, Feedback, GammaTable};
pub use instance::{Instance, VersionSpace};
pub use protocol::{
    run_step, Answer, ComponentIndex, FeedbackKind, FeedbackRecord, HypothesisId, ProtocolState,
    QueryDistribution, QueryId, StepOutcome, Transcript,
};
pub use spaces::{HypothesisSpace, SpaceSpec};
