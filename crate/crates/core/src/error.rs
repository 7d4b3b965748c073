//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or data shape supplied by the caller.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A numerical routine failed to reach its target (non-convergence,
    /// loss of positive definiteness, and the like).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An optimizer finished but its solution fails the stationarity check.
    #[error("optimality check failed: {0}")]
    Certification(String),

    /// Too many simulation replications failed to produce a usable estimate.
    #[error("simulation failure: {0}")]
    Simulation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn certification(msg: impl Into<String>) -> Self {
        Error::Certification(msg.into())
    }

    pub fn simulation(msg: impl Into<String>) -> Self {
        Error::Simulation(msg.into())
    }
}
