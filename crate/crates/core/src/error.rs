use alloc::string::String;

/// Errors produced by the simulation, learning and fusion code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),

    #[error("distance must be positive and finite, got {0} m")]
    NonPositiveDistance(f64),

    #[error("correlation matrix is not positive definite even with jitter {jitter:e}")]
    CholeskyFailed { jitter: f64 },

    #[error("cannot accumulate energy over an empty sample vector")]
    EmptySamples,

    #[error("expected {expected} report, got {found}")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("zero variance in training features")]
    ZeroVariance,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("training data must contain both H0 and H1 samples")]
    SingleLabel,

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
