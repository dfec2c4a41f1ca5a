use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum OccError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("missing header row in {0}")]
    MissingHeader(PathBuf),

    #[error("duplicate header column '{0}'")]
    DuplicateHeader(String),

    #[error("label column '{0}' not found in header")]
    MissingLabelColumn(String),

    #[error("row {row}, column '{column}': cannot use value '{value}' as a finite number")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("data contains a non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("class '{class}' has {count} samples, at least {required} required")]
    ClassTooSmall {
        class: &'static str,
        count: usize,
        required: usize,
    },

    #[error("no target-class samples available")]
    NoTargetSamples,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("C = {c} is infeasible for {n} samples (need C >= 1/N)")]
    InfeasibleC { c: f64, n: usize },

    #[error("alpha[{index}] = {value} lies outside [0, {upper}]")]
    AlphaOutOfBox {
        index: usize,
        value: f64,
        upper: f64,
    },

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("kernel matrix is degenerate: no eigenvalue above tolerance")]
    DegenerateKernel,

    #[error("projection matrix became non-finite at iteration {0}")]
    NonFiniteProjection(usize),

    #[error("empty hyperparameter grid")]
    EmptyGrid,

    #[error("every grid point failed during cross-validation")]
    AllGridPointsFailed,

    #[error("parameter '{param}' does not apply to model '{model}'")]
    InapplicableParameter { param: String, model: String },

    #[error("model '{0}' is out of scope for this toolkit")]
    OutOfScopeModel(String),

    #[error("unknown model kind '{0}'")]
    UnknownModel(String),
}

pub type Result<T> = std::result::Result<T, OccError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> OccError {
    OccError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
