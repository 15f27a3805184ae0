use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("size {size} exceeds the configured cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("eigenvalue iteration did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
