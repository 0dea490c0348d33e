use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A structured document could not be read. `field` is a path such as `params[2].lower`.
    #[error("parse error at `{field}`: {message}")]
    Parse { field: String, message: String },

    /// A parameter definition violates its invariants.
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: String, message: String },

    /// A configuration does not belong to its design space.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input is degenerate (for example zero variance) and the quantity is undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("covariance matrix is not positive definite after jitter escalation")]
    IllConditioned,

    #[error("model fit failed: {0}")]
    Fit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("history is empty")]
    EmptyHistory,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
