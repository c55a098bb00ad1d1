use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("phase error: {0}")]
    Phase(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("projection did not converge: Parseval defect {defect:.3e} exceeds tolerance {tolerance:.3e}")]
    Projection { defect: f64, tolerance: f64 },

    #[error("integrator failure at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("range error: {0}")]
    Range(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn phase(msg: impl Into<String>) -> Self {
        Error::Phase(msg.into())
    }
}
