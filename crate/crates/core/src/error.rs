use thiserror::Error;

use crate::protocol::{ComponentIndex, QueryId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hypothesis {0} out of range (|H| = {1})")]
    InvalidHypothesis(usize, usize),
    #[error("query {0} out of range (|Q| = {1})")]
    InvalidQuery(usize, usize),
    #[error("component {0} out of range (c = {1})")]
    InvalidComponent(usize, usize),
    #[error("answer value {0} is outside the space's alphabet of size {1}")]
    InvalidAnswer(u8, usize),
    #[error("malformed space spec: {0}")]
    MalformedSpec(String),
    #[error("space would enumerate {size} hypotheses, over the cap of {cap}")]
    BudgetExceeded { size: u128, cap: usize },
    #[error("query distribution invalid: {0}")]
    InvalidDistribution(String),
    #[error("transcript step {step} is not after the previous step {previous}")]
    StepOrder { step: u64, previous: u64 },
    #[error(
        "feedback at query {query}, component {component} says {new} but earlier feedback said {existing}",
        query = .query.0, component = .component.0
    )]
    Contradiction {
        query: QueryId,
        component: ComponentIndex,
        existing: u8,
        new: u8,
    },
    #[error("malformed feedback record: {0}")]
    MalformedRecord(String),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("policy {policy} is not supported on this space: {reason}")]
    UnsupportedPolicy { policy: String, reason: String },
    #[error("no hypothesis is consistent with the feedback")]
    EmptyVersionSpace,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("audit integrity: {0}")]
    AuditIntegrity(String),
    #[error("policy {0} has no exact feedback distribution, so it cannot be audited")]
    UnsupportedAudit(String),
    #[error("undefined input: {0}")]
    UndefinedInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
