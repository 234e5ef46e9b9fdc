use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the pipeline.
///
/// Variants are grouped by the process exit code they map to: usage (1),
/// data (2) and backend (3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}:{line}: field `{field}`: {message}")]
    Malformed {
        source_name: String,
        line: u64,
        field: String,
        message: String,
    },

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("entropy is undefined for an empty distribution")]
    EmptyDistribution,

    #[error("cannot sample from an empty corpus")]
    EmptyCorpus,

    #[error("no knee: {0}")]
    NoKnee(String),

    #[error("unknown template `{0}`")]
    UnknownTemplate(String),

    #[error("unknown document id `{0}`")]
    UnknownDocument(String),

    #[error("duplicate document id `{0}`")]
    DuplicateDocument(String),

    #[error("label contains the clause separator `;`: {0:?}")]
    SeparatorInLabel(String),

    #[error("backend error: {0}")]
    Backend(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(
        source_name: impl Into<String>,
        line: u64,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Malformed {
            source_name: source_name.into(),
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 1 usage, 2 data, 3 backend.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) | Error::UnknownTemplate(_) => 1,
            Error::Backend(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
