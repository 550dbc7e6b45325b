use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Binary container with bad magic or header. `offset` is the byte offset
    /// where decoding stopped.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("truncated data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    /// Text format error; `key` names the offending or missing key.
    #[error("parse error (line {line}, key `{key}`): {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },

    #[error("no valid pixels: {0}")]
    NoValidPixels(String),

    #[error("optimization diverged at iteration {iteration}: loss is {loss}")]
    Divergence { iteration: usize, loss: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
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

    pub(crate) fn parse(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            key: key.into(),
            message: message.into(),
        }
    }
}
