use thiserror::Error;

/// Errors produced by dataset validation, model configuration, and fitting.
#[derive(Debug, Error)]
pub enum Error {
    /// Dataset validation failed; carries the full list of violations.
    #[error("invalid dataset ({} violation(s)):\n  {}", .0.len(), .0.join("\n  "))]
    InvalidData(Vec<String>),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("model selection error: {0}")]
    Selection(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
