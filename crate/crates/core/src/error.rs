//! Error type shared by the numerical layers.

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Input violates a documented precondition (non-positive scale,
    /// inconsistent units, bad configuration value).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A numerical consistency check failed (non-finite data, loss of
    /// conjugate symmetry in a spectrum).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A time integration aborted; partial outputs are flagged upstream.
    #[error("solver abort at t={time}: {reason}")]
    SolverAbort { time: f64, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CoreError::Numeric(msg.into())
    }
}
