use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Tensor shapes of two objects that must agree do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Exhaustive policy search refused: the deterministic policy space is
    /// larger than the configured cap.
    #[error("policy space of size {required} exceeds cap {cap}; raise the cap to at least {required} or shrink the instance")]
    PolicyCapExceeded { required: String, cap: u128 },

    /// The anchor design matrix is numerically rank deficient.
    #[error("anchor design is rank deficient: lambda_min(Sigma) = {lambda_min:.3e}")]
    RankDeficient { lambda_min: f64 },

    /// A configuration field failed validation.
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    /// File I/O failure, annotated with the offending path.
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
