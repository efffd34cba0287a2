use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: &'static str },

    #[error("line {line}: duplicate tweet id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid value for `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("no stems in any tweet; nothing to vectorize")]
    EmptyVocabulary,

    #[error("row {row} has zero norm")]
    ZeroNormRow { row: usize },

    #[error("matrix dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("corpus has no labeled tweets")]
    NoLabels,

    #[error("need at least 3 eligible buckets for a log-linear fit, found {found}")]
    TooFewBuckets { found: usize },

    #[error("fitted slope {slope} is not negative; no decay detected")]
    NoDecay { slope: f64 },

    #[error("need at least 2 samples for a density estimate, got {got}")]
    TooFewSamples { got: usize },

    #[error("sample has zero variance")]
    ZeroVariance,

    #[error("invalid generator settings: {0}")]
    InvalidSynthetic(String),

    #[error("cluster member `{id}` is not in the corpus")]
    UnknownTweet { id: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True when the failure traces back to user-supplied input (files,
    /// flags, corpus content) rather than a defect in the pipeline.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::MalformedLine { .. }
                | Error::MissingField { .. }
                | Error::DuplicateId { .. }
                | Error::EmptyCorpus
                | Error::Config { .. }
                | Error::EmptyVocabulary
                | Error::NoLabels
                | Error::TooFewBuckets { .. }
                | Error::NoDecay { .. }
                | Error::TooFewSamples { .. }
                | Error::ZeroVariance
                | Error::InvalidSynthetic(_)
        )
    }
}
