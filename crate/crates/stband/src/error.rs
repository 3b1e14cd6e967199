use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("domain error: {0}")]
    Domain(String),
    /// A theorem's curvature or sign hypothesis fails on the supplied input.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("linear solve failed: {0}")]
    Linear(String),
}

pub type Result<T> = std::result::Result<T, Error>;
