//! Crate-wide error type.

use thiserror::Error;

/// Unified error type for the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A question string (or question/task pairing) could not be interpreted.
    #[error("invalid question: {0}")]
    InvalidQuestion(String),

    /// The requested task/strategy combination has no defined prompt format.
    #[error("unsupported combination: task {task} with strategy {strategy}")]
    Unsupported { task: String, strategy: String },

    /// Model output could not be parsed into the expected structure.
    #[error("parse error: {0}")]
    Parse(String),

    /// A dataset file or record was malformed.
    #[error("dataset error: {0}")]
    Dataset(String),

    /// A completion backend failed.
    #[error("backend error: {0}")]
    Backend(String),

    /// A replay store had no recording for the requested completion.
    #[error("no recorded completion for request digest {0}")]
    NotRecorded(String),

    /// Configuration file or option error.
    #[error("config error: {0}")]
    Config(String),

    /// An output directory is already in use by another run.
    #[error("output directory is locked by another run: {0}")]
    Locked(String),

    /// Stored run data is missing or inconsistent.
    #[error("run store error: {0}")]
    Store(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
