use thiserror::Error;

/// Crate-wide error type. Validation failures name the offending field so a
/// caller can surface an actionable message without string matching.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid {field}: {message}")]
    Invalid { field: &'static str, message: String },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("time step too large for the grid spacing: {message} (suggested dt <= {suggested_dt:.3e})")]
    Stability { message: String, suggested_dt: f64 },

    #[error("front solve failed: {message}")]
    FrontSolve { message: String },

    #[error("front monotonicity violated: {message}")]
    Monotonicity { message: String },

    #[error("{0}")]
    Runtime(String),
}

impl Error {
    pub fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
