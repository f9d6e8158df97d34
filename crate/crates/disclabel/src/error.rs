use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by failure category so the CLI can map them to
/// distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file; names the offending line.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A relation (or document) fails a structural invariant.
    #[error("relation {relation_id}: {message}")]
    Validation {
        relation_id: String,
        message: String,
    },

    /// Two connectives claim the same token during tag encoding.
    #[error(
        "encoding conflict: token {token} claimed by connectives of {relation_a} and {relation_b}"
    )]
    EncodingConflict {
        token: usize,
        relation_a: String,
        relation_b: String,
    },

    /// Tag encoding or window extraction called with unusable spans.
    #[error("labeling error: {0}")]
    Labeling(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn validation(relation_id: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            relation_id: relation_id.into(),
            message: message.into(),
        }
    }

    /// Exit code category for the CLI (0 is success, 2 is reserved for
    /// argument parsing).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Parse { .. } => 3,
            Error::Validation { .. } | Error::EncodingConflict { .. } | Error::Labeling(_) => 4,
            Error::Config(_) => 5,
            Error::Model(_) => 6,
            Error::Evaluation(_) => 7,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
