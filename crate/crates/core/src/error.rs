use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("polar code ({nc}, {k}) cannot be built: {reason}")]
    Profile { nc: usize, k: usize, reason: &'static str },

    #[error("unsupported CRC width {0}")]
    CrcWidth(usize),

    #[error("weight {weight} exceeds the {rows} rows of the data part")]
    PatternWeight { weight: usize, rows: usize },

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("sweep point {point}: {source}")]
    Sweep {
        point: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
