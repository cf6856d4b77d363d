use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("fixed-point iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("fixed-point iteration diverged: residual {residual:e} after {iterations} iterations")]
    Divergence { residual: f64, iterations: usize },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported system: {0}")]
    Unsupported(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("tuning failed: {0}")]
    TuningFailed(String),
}

impl Error {
    /// Strips any `StepFailed` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::StepFailed { source, .. } => source.root(),
            other => other,
        }
    }
}
