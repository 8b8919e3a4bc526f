use thiserror::Error;

/// Errors produced by the core graph, data and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(&'static str),
    #[error("node {0} is out of range")]
    InvalidNode(usize),
    #[error("no path from node {from} to node {to}")]
    NoPath { from: usize, to: usize },
    #[error("more than {0} simple paths exist")]
    LimitExceeded(usize),
    #[error("cost vector entry {index} is negative or not finite")]
    InvalidCost { index: usize },
    #[error("non-finite costs encountered")]
    NonFiniteCosts,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("speed table has no timestamps")]
    EmptyTable,
    #[error("speed table still has missing entries")]
    IncompleteSpeeds,
    #[error("scenario matrix is empty")]
    EmptyMatrix,
    #[error("scenario matrix carries no timestamps")]
    NoTimestamps,
    #[error("timestamps must be strictly increasing")]
    UnorderedTimestamps,
    #[error("column index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("full covariance matrix was not computed")]
    MissingCovariance,
    #[error("branch-and-bound node budget of {0} exceeded")]
    NodeBudgetExceeded(usize),
    #[error("could not draw enough connected pairs")]
    InsufficientConnectivity,
    #[error("cannot parse uncertainty set `{0}`")]
    ParseSpec(alloc::string::String),
}

pub type Result<T> = core::result::Result<T, Error>;
