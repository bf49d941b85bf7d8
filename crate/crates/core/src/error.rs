use thiserror::Error;

/// Errors raised by state construction and the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("N = {n} exceeds the dense capacity limit of {max} qubits")]
    Capacity { n: usize, max: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid mixture parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bipartition size k = {k} must lie in 1..={max}")]
    InvalidBipartition { k: usize, max: usize },

    #[error("dimensionless time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("phase average needs more than N = {n} nodes, got {n_phases}")]
    TooFewPhases { n: usize, n_phases: usize },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("decomposition solver is degenerate: {0}")]
    SolverDegenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
