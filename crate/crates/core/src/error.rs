use thiserror::Error;

/// Errors raised by model fitting, data preparation and evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolygridError {
    #[error("instrument needs more than two domains, got {0}")]
    TooFewDomains(usize),

    #[error("score at row {row}, column {col} is {value}; scaled scores must lie in (0, 1]")]
    ScoreOutOfRange { row: usize, col: usize, value: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid ranking at row {row}: {reason}")]
    InvalidRanking { row: usize, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("csv error at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("cardinality target {target} unreachable; achievable range is [{lo}, {hi}]")]
    UnreachableCardinality { target: f64, lo: f64, hi: f64 },

    #[error("io error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl From<std::io::Error> for PolygridError {
    fn from(e: std::io::Error) -> Self {
        PolygridError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for PolygridError {
    fn from(e: serde_json::Error) -> Self {
        PolygridError::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PolygridError>;
