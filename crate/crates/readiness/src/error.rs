//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by dataset loading, statistics, checks, and report emission.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("schema mismatch: missing columns {missing:?}, unexpected columns {extra:?}")]
    HeaderMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),

    #[error("dataset has no data rows")]
    EmptyDataset,

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("chart error: {0}")]
    Chart(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
