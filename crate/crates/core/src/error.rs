use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: {dim} expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        dim: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid shape {shape:?}: {reason}")]
    InvalidShape { shape: Vec<usize>, reason: String },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("equivariance error undefined: {0}")]
    ZeroDenominator(String),

    #[error("network has no calibrated normalization statistics (call `calibrate` first)")]
    NotCalibrated,

    #[error("malformed {format} header in {path}: {reason}")]
    MalformedHeader {
        format: &'static str,
        path: PathBuf,
        reason: String,
    },

    #[error("truncated payload in {path}: expected {expected} bytes, found {actual}")]
    TruncatedPayload {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
