//! Error type shared by every module.

use thiserror::Error;

/// Failures raised by the solver and its tooling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalrError {
    /// A geometric operation left its domain (zero point, radius outside a profile's domain).
    #[error("domain error: {0}")]
    Domain(String),

    /// Input failed validation (non-elliptic profile, bad radii, malformed config).
    #[error("validation error: {0}")]
    Validation(String),

    /// The per-mode system is numerically singular; at vanishing loss the
    /// plasmonic structure degenerates by design.
    #[error("resonance-singular system at degree {degree} (condition number {condition:.3e})")]
    ResonanceSingular { degree: usize, condition: f64 },

    /// A per-mode solve failed outright.
    #[error("solver failure at degree {degree}: {reason}")]
    Solver { degree: usize, reason: String },

    /// The radial ODE integrator did not converge.
    #[error("integrator failure: {0}")]
    Integrator(String),

    /// Not enough data to produce a verdict.
    #[error("insufficient data: {0}")]
    Insufficient(String),

    /// Configuration or output I/O failure.
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, CalrError>;

impl From<std::io::Error> for CalrError {
    fn from(e: std::io::Error) -> Self {
        CalrError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CalrError {
    fn from(e: serde_json::Error) -> Self {
        CalrError::Validation(e.to_string())
    }
}
