use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("unknown strategy `{0}` (expected one of SC, NO, FO, NU, FU, NOU)")]
    UnknownStrategy(String),

    #[error("unknown weight initializer `{0}` (expected uniform or power_law)")]
    UnknownWeightInit(String),

    #[error("non-finite value in {what} at round {round}")]
    NonFinite { what: String, round: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Malformed { path: PathBuf, line: u64, reason: String },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("comparison failed: {0}")]
    Comparison(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
