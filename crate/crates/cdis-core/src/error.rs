//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by graph construction, statistical tests, discovery
/// runs, and data generation.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition (unknown vertex,
    /// overlapping sets, malformed target, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A graph fails a structural invariant (cycle, duplicate edge,
    /// selection vertex with children, ...).
    #[error("malformed graph: {0}")]
    MalformedGraph(String),

    /// A guarded operation was asked to exceed its enumeration or size
    /// limit.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// Too few samples for the requested statistical test.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The conditioning set makes the test statistic undefined
    /// (singular correlation matrix, constant column, ...).
    #[error("degenerate conditioning: {0}")]
    DegenerateConditioning(String),

    /// Two orientation sources disagree about an edge mark.
    #[error("orientation conflict on edge {i}*-*{j}: {detail}")]
    OrientationConflict { i: u32, j: u32, detail: String },

    /// Selection thresholds reject essentially every sample.
    #[error("selection too strict: joint acceptance rate {rate:.3e} (worst selection vertex S{offender})")]
    SelectionTooStrict { rate: f64, offender: usize },

    /// A file or serialized payload could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn malformed(msg: impl Into<String>) -> Self {
        Error::MalformedGraph(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
