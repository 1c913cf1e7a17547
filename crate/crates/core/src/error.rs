use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular map: {0}")]
    Singular(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("did not converge: {0}")]
    NoConvergence(String),
    #[error("integration step rejected: {0}")]
    StepRejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;
