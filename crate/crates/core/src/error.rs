use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which condition a candidate variogram matrix failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VariogramDefect {
    #[error("matrix is not square ({rows} rows, row {row} has {cols} entries)")]
    NotSquare { rows: usize, row: usize, cols: usize },
    #[error("entry ({i},{j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("asymmetric: gamma[{i}][{j}] = {a} but gamma[{j}][{i}] = {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("nonzero diagonal entry gamma[{i}][{i}] = {value}")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("negative entry gamma[{i}][{j}] = {value}")]
    NegativeEntry { i: usize, j: usize, value: f64 },
    #[error("not conditionally negative definite: projected eigenvalue {eigenvalue:e} exceeds tolerance {tol:e}")]
    NotConditionallyNegative { eigenvalue: f64, tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {dim} out of range (supported {min}..={max})")]
    DimensionOutOfRange { dim: usize, min: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires a nonempty subset")]
    EmptySubset,

    #[error("subset bits {bits:#b} exceed ground set of size {dim}")]
    SubsetOutOfRange { bits: u64, dim: usize },

    #[error("missing table entry for subset {0}")]
    MissingEntry(String),

    #[error("invalid variogram: {0}")]
    InvalidVariogram(#[from] VariogramDefect),

    #[error("invalid parameter {name}{}: {reason}", index.map(|i| format!("[{i}]")).unwrap_or_default())]
    InvalidParameter {
        name: String,
        index: Option<usize>,
        reason: String,
    },

    #[error("not union-completely alternating: spectral mass tau({subset}) = {mass:e} is negative")]
    NegativeMass { subset: String, mass: f64 },

    #[error("marginal constraint violated for component {index}: sum of tau over sets containing it is {sum}")]
    MarginalConstraint { index: usize, sum: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("grid too large: {points} points exceeds limit {limit}")]
    GridTooLarge { points: u128, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &str, index: Option<usize>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            index,
            reason: reason.into(),
        }
    }
}
