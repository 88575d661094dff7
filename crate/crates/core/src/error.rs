use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input file not found: {0}")]
    MissingFile(PathBuf),
    #[error("i/o error reading {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {col}: cannot parse {cell:?} as a finite number")]
    NonNumericCell {
        row: usize,
        col: usize,
        cell: String,
    },
    #[error("matrix has no data rows or no columns")]
    EmptyMatrix,
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("at least 2 samples are required, got {0}")]
    InsufficientSamples(usize),
    #[error("non-finite input to the rotation kernel")]
    NonFiniteInput,
    #[error("fewer than 2 active variables remain")]
    TooFewActive,
    #[error("invalid level {level}: must lie in {min}..={max}")]
    InvalidLevel {
        level: usize,
        min: usize,
        max: usize,
    },
    #[error("invalid feature count K = {k}: must lie in 1..={p}")]
    InvalidK { k: usize, p: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("row {row}, column {col}: log transform requires positive entries, found {value}")]
    NonPositiveEntry { row: usize, col: usize, value: f64 },
    #[error("operation requires a {expected} similarity matrix")]
    WrongMetric { expected: &'static str },
    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})"
    )]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("invalid dissimilarity matrix: {0}")]
    InvalidDissimilarity(String),
    #[error("invalid spec field `{field}`: {reason}")]
    InvalidSpec { field: String, reason: String },
    #[error("label count {labels} does not match variable count {p}")]
    LabelMismatch { labels: usize, p: usize },
    #[error("invalid cross-validation setup: {0}")]
    InvalidCv(String),
    #[error("fold {fold}: class {class} is absent from the training rows")]
    DegenerateFold { fold: usize, class: u8 },
}

impl Error {
    pub(crate) fn spec(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
