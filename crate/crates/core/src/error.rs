use thiserror::Error;

/// Errors raised by assembly, solvers and experiments.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates its precondition.
    #[error("invalid {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Inner linear solver or factorization failed.
    #[error("solver failure: {reason} (iterations: {iterations}, relative residual: {residual:e})")]
    Solver {
        reason: String,
        iterations: usize,
        residual: f64,
    },

    /// A documented operation contract was violated by the caller's input.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A numerical experiment could not produce the requested quantity.
    #[error("experiment failure: {0}")]
    Experiment(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
