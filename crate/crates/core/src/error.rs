//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    InvalidMatrix,

    #[error("input is empty")]
    EmptyInput,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("basis is rank-deficient at the given tolerance")]
    DegenerateBasis,

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {detail}")]
    ParseError { line: usize, detail: String },

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("self-expression constraints are infeasible for column {column}")]
    InfeasibleConstraint { column: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
