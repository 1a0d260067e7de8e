//! Crate-wide error type.

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

    #[error("non-numeric cell {token:?} at row {row}, column {col}")]
    NonNumericCell { row: usize, col: usize, token: String },

    #[error("label {value:?} at row {row} is not 0 or 1")]
    BadLabel { row: usize, value: String },

    #[error("column {name:?} not found in header")]
    MissingColumn { name: String },

    #[error("row {row} has {got} cells, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },

    #[error("dimension mismatch: detector was trained on {expected} attributes, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset too small: {0}")]
    DatasetTooSmall(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("model file: {0}")]
    ModelFormat(#[from] serde_json::Error),
}
