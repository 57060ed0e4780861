use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown user `{0}`")]
    UnknownUser(String),

    #[error("unknown discussion `{0}`")]
    UnknownDiscussion(String),

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("empty sequence")]
    EmptySequence,

    #[error("internal error: {0}")]
    Internal(String),

    #[error("infeasible constraints: discussion `{discussion}` cannot receive a {requirement}")]
    Infeasible {
        discussion: String,
        requirement: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by the caller's data rather than by the tool.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Infeasible { .. } | Error::Internal(_))
    }
}
