use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("line {line}, column `{column}`: cannot parse {value:?} as a number")]
    ParseCell {
        line: u64,
        column: String,
        value: String,
    },

    #[error("label column {0} not found in header")]
    MissingLabelColumn(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid density input: {0}")]
    InvalidDensity(String),

    #[error("density estimates are defined on different grids")]
    GridMismatch,

    #[error("feature subset is empty")]
    EmptySubset,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal numerical error: {0}")]
    Numerical(String),

    #[error("failed to serialize report: {0}")]
    Json(#[from] serde_json::Error),
}
