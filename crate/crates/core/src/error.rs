use thiserror::Error;

/// Errors raised by the solver kernels, diagnostics and scenario handling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid physics coefficients: {0}")]
    InvalidPhysics(String),

    #[error("non-finite field values at step {step}")]
    BlowUp { step: u64 },

    #[error(
        "fixed-point iteration failed at step {step}: {reason} (residual {residual:e} after {iterations} iterations)"
    )]
    IterationFailure {
        step: u64,
        iterations: u32,
        residual: f64,
        reason: String,
    },

    #[error("zero pivot in tridiagonal solve at row {row}")]
    SingularPivot { row: usize },

    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unknown preset '{name}'; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },
}

pub type Result<T> = std::result::Result<T, Error>;
