use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by table ingestion, sketching, and estimation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV parse error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("column {name:?} not found in {path}")]
    MissingColumn { name: String, path: PathBuf },

    #[error("no rows survived ingestion of {path} ({dropped} dropped)")]
    EmptyTable { path: PathBuf, dropped: usize },

    #[error("aggregate {agg} requires numeric input, got text")]
    AggregateTypeMismatch { agg: &'static str },

    #[error("aggregate over empty value group")]
    EmptyAggregate,

    #[error("aug-side sketch requires an aggregate function")]
    MissingAggregate,

    #[error("aug-side sketch has duplicate key hashes; cannot be joined")]
    DuplicateAugKeys,

    #[error("sketch format error: {0}")]
    SketchFormat(String),

    #[error("sketch hash contract mismatch: expected {expected:?}, got {actual:?}")]
    HashContractMismatch { expected: String, actual: String },

    #[error("empty join: sketches share no keys")]
    EmptyJoin,

    #[error("estimator {estimator} requires {requirement}")]
    EstimatorInput {
        estimator: &'static str,
        requirement: String,
    },

    #[error("sample too small: need more than k={k} points, got {n}")]
    SampleTooSmall { n: usize, k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter search exhausted after {attempts} attempts")]
    RetryExhausted { attempts: usize },

    #[error("empty corpus directory {0}")]
    EmptyCorpus(PathBuf),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
