use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row} has length {found}, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("row {row} lists column {col} twice")]
    DuplicateEntry { row: usize, col: usize },
    #[error("row {row} references column {col}, but the matrix has {cols} columns")]
    ColumnOutOfRange { row: usize, col: usize, cols: usize },
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular matrix: rank {rank} < {size}")]
    Singular { rank: usize, size: usize },
}

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("CSS commutation violated: Hx Hz^T has {nonzero} nonzero entries")]
    CommutationViolated { nonzero: usize },
    #[error("declared k = {declared} but n - rank(Hx) - rank(Hz) = {computed}")]
    LogicalCountMismatch { declared: usize, computed: usize },
    #[error("declared n = {declared} but the check matrices have {found} columns")]
    LengthMismatch { declared: usize, found: usize },
    #[error("invalid construction parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown code '{0}'")]
    UnknownCode(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Matrix(#[from] Gf2Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("failure target must be at least 1")]
    ZeroFailureTarget,
    #[error("weight {weight} exceeds code length {n}")]
    WeightTooLarge { weight: usize, n: usize },
    #[error(
        "exhaustive verification needs {patterns} patterns, above the budget of {budget}; use sampled mode"
    )]
    BudgetExceeded { patterns: u128, budget: u128 },
    #[error("invalid decoder parameters: {0}")]
    InvalidParams(String),
}
