use thiserror::Error;

use crate::scenario::NodeId;
use crate::time::Time;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input to trajectory processing or the generator.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("generation error: {0}")]
    Generation(String),

    /// A scenario field violates a schema or domain invariant.
    #[error("invalid scenario: `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("cannot parse scenario: {0}")]
    Schema(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown graph vertex {0}")]
    UnknownVertex(String),

    /// A trace hop has no window that could have carried it.
    #[error("cannot embed hop {hop} ({from} -> {to}, received at {received}s): {reason}")]
    Embedding {
        hop: usize,
        from: NodeId,
        to: NodeId,
        received: Time,
        reason: String,
    },

    #[error("trace was not delivered; global detection needs a complete path")]
    Undelivered,

    /// Trace and neighbor tables disagree.
    #[error("inconsistent trace: {0}")]
    Inconsistent(String),

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
