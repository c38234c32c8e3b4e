use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum AvgError {
    #[error("invalid multiplier: {0}")]
    InvalidMultiplier(String),

    #[error(
        "precision budget exceeded: {required_bits} working bits need about {required_bytes} bytes, \
         budget is {budget_bytes} bytes"
    )]
    PrecisionBudget {
        required_bits: u64,
        required_bytes: u64,
        budget_bytes: u64,
    },

    #[error("comparison at n = {n} could not be resolved within {attempts} precision increases")]
    Indeterminate { n: usize, attempts: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("orbit does not carry unreduced values; regenerate with unreduced retention")]
    MissingUnreduced,

    #[error("degenerate variation window: N^-s = {cutoff} is not below delta = {delta}")]
    DegenerateWindow { cutoff: f64, delta: f64 },

    #[error("divergent window integral on [{start}, {end}]")]
    DivergentWindow { start: f64, end: f64 },

    #[error("parse error in `{input}`: {message}")]
    Parse { input: String, message: String },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, AvgError>;

pub(crate) fn invalid(msg: impl Into<String>) -> AvgError {
    AvgError::InvalidArgument(msg.into())
}
