use alloc::string::String;

/// Errors raised by the analysis core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("objective vectors need at least 2 components, got {0}")]
    TooFewObjectives(usize),

    #[error("non-finite value {value} at component {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("no data: {0}")]
    Empty(&'static str),

    #[error("variable {index} = {value} outside [{lower}, {upper}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("decision vector does not match the problem: {0}")]
    BadDecision(String),

    #[error("domain violation: {0}")]
    Domain(&'static str),

    #[error("unsupported objective dimension {found} (supported: {supported})")]
    UnsupportedDimension { found: usize, supported: &'static str },

    #[error("attainment level {level} outside 1..={runs}")]
    LevelOutOfRange { level: usize, runs: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
