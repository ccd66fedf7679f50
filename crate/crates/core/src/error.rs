use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("vocabulary has {0} words, at least 2 are required")]
    InsufficientVocabulary(usize),

    #[error("negative table of size {size} cannot hold {vocab} words")]
    TableTooSmall { size: usize, vocab: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("word {0:?} is out of vocabulary")]
    OutOfVocabulary(String),

    #[error("word {0:?} has no representation (no vocabulary entry and no n-grams)")]
    NoRepresentation(String),

    #[error("similarity undefined for a zero vector")]
    ZeroVector,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Short machine-readable category, used by the CLI's error line.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Decode { .. } | Error::Parse { .. } | Error::Checkpoint(_) => "parse",
            Error::DimensionMismatch { .. } => "config",
            _ => "data",
        }
    }
}
