//! Error types shared across the library.

use thiserror::Error;

/// Library-wide error type.
///
/// Numeric payloads are carried as `f64` regardless of the scalar the
/// operation ran at, so the error type stays free of type parameters.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{context}: dimension mismatch (expected {expected}, got {actual})")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("degenerate weights: |w[{i}] - w[{j}]| = {gap:e} below minimum gap {min_gap:e}")]
    WeightDegenerate {
        i: usize,
        j: usize,
        gap: f64,
        min_gap: f64,
    },

    #[error("weight {index} is not strictly positive ({value})")]
    WeightNotPositive { index: usize, value: f64 },

    #[error("matrix is not Hermitian (defect {defect:e} exceeds tolerance {tol:e})")]
    NotHermitian { defect: f64, tol: f64 },

    #[error(
        "eigensolver failed to converge after {iterations} iterations \
         (worst residual {worst_residual:e})"
    )]
    ConvergenceFailure {
        iterations: usize,
        worst_residual: f64,
    },

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("no background pixels left after excluding targets (need at least {required})")]
    EmptyBackground { required: usize },

    #[error("{context}: requested size {requested} exceeds limit {limit}")]
    ResourceLimit {
        context: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed container: {0}")]
    Container(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
