use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CachingError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("insufficient data: need {needed} segments, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("granularity error: {0}")]
    Granularity(String),
    #[error("infeasible: {states} states exceed the limit of {limit}; {hint}")]
    Infeasible { states: u128, limit: u128, hint: String },
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T, E = CachingError> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> CachingError {
    CachingError::Parameter(msg.into())
}
