use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("write failed: {0}")]
    Write(#[from] io::Error),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Data(String),

    #[error("word {word:?}: {message}")]
    Word { word: String, message: String },

    #[error("score range overflow: {0}")]
    ScoreRange(String),

    #[error("edge store {path} is incomplete")]
    IncompleteStore { path: PathBuf },

    #[error("checksum mismatch: {0}")]
    DigestMismatch(String),
}

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Io,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    pub fn data(message: impl Into<String>) -> Self {
        Error::Data(message.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } | Error::Write(_) => ErrorKind::Io,
            Error::InvalidArgument(_) | Error::ScoreRange(_) => ErrorKind::Usage,
            Error::Parse { .. }
            | Error::Data(_)
            | Error::Word { .. }
            | Error::IncompleteStore { .. }
            | Error::DigestMismatch(_) => ErrorKind::Data,
        }
    }
}
