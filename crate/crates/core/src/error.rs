use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of an operation (bad index, wrong length, empty set).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter combination cannot be realised (divisibility, capacity, positivity).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A dense object would exceed the configured entry cap.
    #[error("size cap exceeded: {entries} entries requested, cap is {cap}")]
    Size { entries: usize, cap: usize },

    /// A least-squares system is numerically rank deficient.
    #[error("singular system: condition estimate {condition:.3e}")]
    Singular { condition: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
