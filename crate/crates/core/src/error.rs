use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("point is not interior to the domain")]
    NotInterior,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("function is not strictly increasing on its support")]
    NotStrictlyIncreasing,
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("engine failure: {0}")]
    Engine(String),
    /// The inversion sweeps ran out; carries the last angles and residuals.
    #[error("no convergence after {sweeps} sweeps (sup residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64, psi: Vec<f64>, residuals: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
