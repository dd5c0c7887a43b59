//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("label {label} out of range for {k} classes")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("class quota unreachable for class(es) {starving:?} after {draws} raw draws")]
    QuotaUnreachable { starving: Vec<usize>, draws: usize },

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("remote transport failure: {0}")]
    Transport(String),

    #[error("remote returned status {0}")]
    RemoteStatus(u16),

    #[error("malformed remote response: {0}")]
    MalformedResponse(String),

    #[error("arity mismatch: sent {sent} points, received {received} labels")]
    ArityMismatch { sent: usize, received: usize },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse failure at line {line}: {message}")]
    ParseFailure { line: usize, message: String },

    #[error("unknown category {value:?} in column {column:?} at line {line}")]
    UnknownCategory {
        column: String,
        value: String,
        line: usize,
    },

    #[error("all rows were dropped while loading")]
    AllRowsDropped,

    #[error("class {class} has only {count} members; too small to stratify")]
    ClassTooSmall { class: usize, count: usize },

    #[error("unsupported model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
