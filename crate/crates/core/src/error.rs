use thiserror::Error;

/// Failures raised while evaluating objectives or running an optimizer step.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("non-finite {what} at learning rate {eta}")]
    NonFinite { what: &'static str, eta: f64 },

    #[error("inner loop did not terminate after {inner_loops} probes (rate trajectory {etas:?})")]
    NonTermination { inner_loops: usize, etas: Vec<f64> },

    #[error("adaptive inner loop did not terminate after {inner_loops} probes; dimensions {dims:?} still active")]
    StuckDimensions { inner_loops: usize, dims: Vec<usize> },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty batch")]
    EmptyBatch,

    #[error("zero variance feature cannot be normalized")]
    ZeroVariance,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, OptimError>;
