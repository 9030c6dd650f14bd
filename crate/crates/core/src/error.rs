use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("row {row}: field `{field}`: {reason}")]
    SchemaViolation {
        row: usize,
        field: String,
        reason: String,
    },

    #[error("dataset has no rows")]
    EmptyRows,

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("unknown class label `{0}`")]
    UnknownLabel(String),

    #[error("unknown row id {0}")]
    UnknownId(usize),

    #[error("cardinality must be at least 1, got {0}")]
    Cardinality(usize),

    #[error("smoothing constant must be positive, got {0}")]
    SmoothingConstant(f64),

    #[error("no purely classified instances; noise threshold is undefined")]
    EmptyPure,

    #[error("class counts are all zero")]
    ZeroCounts,

    #[error("length mismatch: {predicted} predictions vs {actual} actual labels")]
    LengthMismatch { predicted: usize, actual: usize },

    #[error("cannot evaluate an empty prediction list")]
    EmptyPredictions,

    #[error("invalid fold count {k} for {n} rows")]
    FoldCount { k: usize, n: usize },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid segmentation: {0}")]
    Segmentation(String),

    #[error("invalid generator config: {0}")]
    Generator(String),

    #[error("invalid noise injection: {0}")]
    Injection(String),

    #[error("report and injection disagree on row ids: {0}")]
    IdMismatch(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
