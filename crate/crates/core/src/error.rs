use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate tweet_id {tweet_id:?}")]
    DuplicateTweetId { line: usize, tweet_id: String },
    #[error("hashtag {0:?} is seeded with both -1 and +1")]
    ContradictorySeed(String),
    #[error("label propagation needs at least one seeded hashtag")]
    NoSeeds,
    #[error("unknown user {0:?}")]
    UnknownUser(String),
    #[error("networks were built from different corpora")]
    MismatchedCorpora,
    #[error("network is not symmetric: edge ({0:?}, {1:?}) has no reverse")]
    NotSymmetric(String, String),
    #[error("topic {topic} out of range for a model with {k} topics")]
    TopicOutOfRange { topic: usize, k: usize },
    #[error("no usable documents for topic modeling")]
    NoDocuments,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
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
}
