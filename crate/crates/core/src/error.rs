use thiserror::Error;

/// Errors raised by the sketching, baseline and evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid privacy budget: {0}")]
    InvalidBudget(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("duplicate user id `{0}`")]
    DuplicateUserId(String),

    #[error("unknown user id `{0}`")]
    UnknownUserId(String),

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u64),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
