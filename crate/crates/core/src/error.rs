use thiserror::Error;

/// Errors produced by tensor construction, linear-algebra kernels, solvers
/// and file I/O.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range for dimension of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gram matrix is numerically singular (after jitter escalation)")]
    SingularGram,

    #[error("matrix too large for combinatorial Kruskal-rank search: {cols} columns (limit {limit})")]
    KruskalGuard { cols: usize, limit: usize },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
