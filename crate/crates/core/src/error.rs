use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("split fractions must be positive and sum to 1: {0}")]
    BadSplit(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("Cholesky factorization failed after max jitter")]
    CholeskyFailed,

    #[error("elliptical slice sampling started from an infeasible state")]
    InfeasibleState,

    #[error("rejection sampling exceeded {0} draws")]
    RejectionExceeded(usize),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("{0}")]
    Other(String),
}
