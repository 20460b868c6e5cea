use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by the numerics, estimator, model, and study layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric at ({row},{col}): {lower} vs {upper}")]
    NotSymmetric {
        row: usize,
        col: usize,
        lower: f64,
        upper: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite: pivot {pivot} is {value:.6e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("covariance of observation {index} is not positive definite (pivot {pivot})")]
    ObservationNotPositiveDefinite { index: usize, pivot: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model `{model}` does not expose {capability}")]
    MissingCapability {
        model: String,
        capability: &'static str,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("reference matrix has zero spectral norm; relative deviation is undefined")]
    ZeroReferenceNorm,

    #[error("oracle cache file {path} is malformed: {reason}")]
    MalformedCache { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    ///
    /// 1 = configuration error, 2 = numerical failure, 3 = I/O error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::MissingCapability { .. } | Error::InvalidParameter(_) => 1,
            Error::Io(_) | Error::MalformedCache { .. } => 3,
            _ => 2,
        }
    }
}
