use thiserror::Error;

/// Failures reported by the occupancy engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OccupancyError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("numeric instability at step {step}: {detail}")]
    NumericInstability { step: u64, detail: String },

    #[error("resource limit: {what} needs {needed}, budget is {budget}")]
    ResourceLimit {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

pub type Result<T, E = OccupancyError> = std::result::Result<T, E>;
