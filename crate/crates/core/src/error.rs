use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum PufError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unknown MZI id {0} on chip")]
    UnknownMzi(u32),

    #[error("response has zero total power")]
    DegenerateResponse,

    #[error("bin fraction mismatch: {0} vs {1}")]
    BinMismatch(f64, f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("unknown challenge id {0}")]
    UnknownChallenge(u64),

    #[error("every challenge in the database has been consumed")]
    Exhausted,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
}

impl PufError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PufError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, PufError>;
