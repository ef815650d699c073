use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlError {
    #[error("invalid exponent {0}: exponents must lie in [1, inf]")]
    InvalidExponent(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("capacity exceeded: {what} is {size}, cap is {cap}")]
    Capacity { what: String, size: u128, cap: u128 },
    #[error("finiteness certificate required: {0}")]
    MissingCertificate(String),
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("invalid datum: {0}")]
    InvalidDatum(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BlError>;
