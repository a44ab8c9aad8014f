use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("sample '{id}': expected {expected} features, found {found}")]
    FeatureDim {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate sample id '{0}'")]
    DuplicateId(String),

    #[error("sample '{id}': unknown gold concept '{concept}'")]
    UnknownConcept { id: String, concept: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("embedding file line {line}: {message}")]
    Embedding { line: usize, message: String },

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("learner diverged at iteration {iteration} (lambda = {lambda}): {message}")]
    Diverged {
        iteration: usize,
        lambda: f64,
        message: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
