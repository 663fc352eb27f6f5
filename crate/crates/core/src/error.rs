use thiserror::Error;

/// Errors produced across the optimization stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("covariance factorization failed after jitter escalation up to {max_jitter:e} ({attempts} attempts)")]
    Conditioning { max_jitter: f64, attempts: usize },

    #[error("candidate pool exhausted after exclusion (radius {radius:e})")]
    PoolExhausted { radius: f64 },

    #[error("oracle `{oracle}` failed: {reason}")]
    Oracle { oracle: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_check(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension(format!("{what}: expected {expected}, got {got}")))
    }
}
