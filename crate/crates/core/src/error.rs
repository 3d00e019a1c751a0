use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing label column `{0}`")]
    MissingLabelColumn(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("non-numeric feature cell at line {line}, column `{column}`: {value:?}")]
    NonNumericCell { line: u64, column: String, value: String },

    #[error("fewer than two distinct labels after mapping")]
    SingleLabel,

    #[error("single-class input")]
    SingleClass,

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("class with {count} samples is smaller than k={k}")]
    ClassTooSmall { count: usize, k: usize },

    #[error("degenerate model: no support vectors")]
    DegenerateModel,

    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("malformed result file: {0}")]
    ResultFormat(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the input data rather than by how the tool was invoked.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::InvalidConfig(_) | Error::UnknownMetric(_))
    }
}
