//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by training, encoding, evaluation and analysis.
#[non_exhaustive]
#[derive(Debug, Error)]
pub enum Error {
    /// Input bytes were not valid UTF-8.
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },

    /// A token id outside the vocabulary was supplied.
    #[error("token id {id} out of range (vocab size {vocab_size}) at position {position}")]
    TokenIdOutOfRange {
        id: u32,
        vocab_size: u32,
        position: usize,
    },

    /// The training corpus contained no usable text.
    #[error("empty training corpus")]
    EmptyCorpus,

    /// A configuration value failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A model file could not be parsed or failed its invariants.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Two models could not be combined.
    #[error("incompatible models: {0}")]
    IncompatibleModels(String),

    /// A metric was requested over inputs that cannot support it.
    #[error("metric error: {0}")]
    Metric(String),

    /// A corpus manifest or corpus file was unusable.
    #[error("corpus error: {0}")]
    Corpus(String),

    /// An embedding matrix failed validation.
    #[error("embedding error: {0}")]
    Embedding(String),

    /// Underlying I/O failure, with the path that caused it.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// JSON (de)serialization failure.
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
