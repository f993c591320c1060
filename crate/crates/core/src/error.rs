use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema violation at `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("non-finite force on object {id} at frame {frame}")]
    NonFiniteForce { id: u32, frame: u64 },

    #[error("replay diverged at frame {frame}: {detail}")]
    ReplayDivergence { frame: u64, detail: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Llm(#[from] crate::llm::LlmError),
}

impl Error {
    pub fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
