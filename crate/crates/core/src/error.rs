use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A factorial ratio whose net valuation at `prime` is negative.
    #[error("ratio is not an integer: prime {prime} has exponent {exponent}")]
    NonIntegral { prime: u64, exponent: i64 },

    /// An identity that is a theorem failed to hold (a bug, not bad input).
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("I/O error: {0}")]
    Stream(#[from] io::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

/// Coarse failure classes, used by the CLI for exit codes and by the C ABI
/// for status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidArgument,
    NonIntegral,
    Parse,
    Resource,
    Io,
    Verification,
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::InvalidArgument,
            Error::NonIntegral { .. } => ErrorKind::NonIntegral,
            Error::Inconsistency(_) => ErrorKind::Internal,
            Error::Parse { .. } => ErrorKind::Parse,
            Error::Resource(_) => ErrorKind::Resource,
            Error::Io { .. } | Error::Stream(_) => ErrorKind::Io,
            Error::Verification(_) => ErrorKind::Verification,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
