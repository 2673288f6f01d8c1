use thiserror::Error;

/// Errors raised by the numerical modules and the command driver.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    Domain(String),

    /// The spectrum truncation hit the degree cap before its stopping rule held.
    #[error("truncation budget exhausted: {0}")]
    Budget(String),

    /// The fixed-point solver could not produce a root.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A numeric quantity is undefined for the given inputs.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
