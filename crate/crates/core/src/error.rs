use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} <= 0 at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("value out of domain: {0}")]
    OutOfDomain(String),

    #[error("prior covariance is not positive definite")]
    SingularPrior,

    #[error("optimization diverged at epoch {epoch}: non-finite iterate")]
    DivergedOptimization { epoch: usize },

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("degenerate design: sum of squared covariates is zero")]
    DegenerateDesign,

    #[error("degenerate predictive scale {0}; density is undefined")]
    DegenerateScale(f64),

    #[error("test set is empty")]
    EmptyTestSet,

    #[error("non-finite log density {value} at test index {index}")]
    NonFiniteLogDensity { index: usize, value: f64 },

    #[error("confidence interval unavailable (needs at least two evaluations)")]
    MissingCi,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("input is empty")]
    EmptyInput,

    #[error("unknown variant `{0}`")]
    UnknownVariant(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("malformed record: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
