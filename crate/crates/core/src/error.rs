use thiserror::Error;

/// Errors produced by the certification library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank parameter r={r} out of range [1, {max}]")]
    RankOutOfRange { r: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("spectrum does not sum to one (sum = {0})")]
    NotNormalized(f64),

    /// The requested adversary set contains states that pass every test
    /// with certainty, so no finite number of tests separates them.
    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("operator does not fix the target state (residual {0:.3e})")]
    TargetNotFixed(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Two closed-form branches that must agree at a gluing point did not.
    #[error("branch mismatch at {location}: {left} vs {right}")]
    BranchMismatch {
        location: String,
        left: f64,
        right: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
