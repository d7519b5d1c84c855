use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Model parameters outside the admissible range (message names the violated bound).
    #[error("parameter out of model: {0}")]
    OutOfModel(String),

    /// A derived exponent fails one of its range constraints.
    #[error("exponent constraint violated: {0}")]
    Constraint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("ground state iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ground state iteration collapsed (stabilizing factor {factor:e})")]
    Collapse { factor: f64 },

    #[error("non-finite state detected at t = {time}")]
    NonFinite { time: f64 },

    #[error("malformed field file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
