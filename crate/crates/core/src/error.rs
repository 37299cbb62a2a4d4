use std::path::PathBuf;

use thiserror::Error;

use crate::elicitation::{BackendError, RawResponse};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Malformed input, located by source name and 1-based line number.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("design matrix is rank deficient ({predictors} predictors, rank {rank})")]
    RankDeficient { predictors: usize, rank: usize },

    #[error("concept lists differ: only in left {only_left:?}, only in right {only_right:?}")]
    ConceptMismatch {
        only_left: Vec<String>,
        only_right: Vec<String>,
    },

    #[error(transparent)]
    Backend(#[from] BackendError),

    #[error("run {run_id} aborted at concept {concept_id}: {source}")]
    RunAborted {
        run_id: u32,
        concept_id: String,
        partial: Vec<RawResponse>,
        #[source]
        source: BackendError,
    },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
