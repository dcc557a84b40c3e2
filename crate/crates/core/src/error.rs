use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside the supported domain (bit length, modulus, ranges).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("entropy source failure: {0}")]
    Entropy(String),

    #[error("clock failure: {0}")]
    Clock(String),

    #[error("key/params mismatch: {0}")]
    ParamsMismatch(String),

    #[error("key id `{0}` is already registered")]
    Conflict(String),

    #[error("key id `{0}` is not registered")]
    NotFound(String),

    #[error("invalid key id: {0}")]
    InvalidKeyId(String),

    #[error("storage error at {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("payload of {len} bytes exceeds QR version 40 capacity at level {level}")]
    Capacity { len: usize, level: char },

    #[error("QR decode failed: {0}")]
    QrDecode(String),

    #[error("refused: {0}")]
    Refused(String),
}

impl Error {
    pub(crate) fn storage(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Storage {
            path: path.into(),
            source,
        }
    }

    /// Maps a serde_json failure onto the parse/schema split.
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match err.classify() {
            Category::Data => Error::Schema(err.to_string()),
            Category::Io | Category::Syntax | Category::Eof => Error::Parse(err.to_string()),
        }
    }
}
