use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("entry out of floating-point range (log magnitude {log_value:.1}) at ({n}, {m})")]
    EntryRange { n: u64, m: u64, log_value: f64 },

    #[error("index ({n}, {m}) violates the index origin {origin} of family {family}")]
    IndexOrigin {
        family: char,
        origin: u64,
        n: u64,
        m: u64,
    },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("{solver} did not converge after {iterations} iterations")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
    },

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
