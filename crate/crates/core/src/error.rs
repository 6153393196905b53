use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular information matrix: {0}")]
    Singular(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("unknown model `{0}` (expected logit, probit or exponential)")]
    UnknownModel(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, DesignError>;
