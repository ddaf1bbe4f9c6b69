use std::path::PathBuf;

use thiserror::Error;

use crate::model::TemplateId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid regex `{pattern}`: {source}")]
    Regex {
        pattern: String,
        #[source]
        source: regex::Error,
    },

    #[error("line {line}: does not match log format `{format}`")]
    HeaderMismatch { line: usize, format: String },

    #[error("index consistency violation: template {id} is not in the posting list of `{term}`")]
    Consistency { term: String, id: TemplateId },

    #[error("unknown template id {0}")]
    UnknownTemplate(TemplateId),

    #[error("length mismatch: template has {template} tokens, message has {message}")]
    LengthMismatch { template: usize, message: usize },

    #[error("grouping length mismatch: predicted {predicted} lines, truth {truth} lines")]
    GroupingLength { predicted: usize, truth: usize },

    #[error("{path}: {message}")]
    GroundTruth { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

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
}
