use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed PPM header: {0}")]
    PpmHeader(String),

    #[error("truncated PPM pixel data: expected {expected} samples, found {found}")]
    PpmTruncated { expected: usize, found: usize },

    #[error("unsupported PPM maxval {0} (only 255 is accepted)")]
    PpmMaxval(u32),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("channel value {0} outside [0, 255]")]
    ChannelOutOfRange(i64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("invalid fixture: {0}")]
    Fixture(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
