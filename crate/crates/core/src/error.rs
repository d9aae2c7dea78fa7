use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Argument outside the range served by a solver or cache.
    #[error("out of range: {0}")]
    Range(String),
    /// An iterative scheme failed to reach its tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// Invalid run configuration (CLI or file input).
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
