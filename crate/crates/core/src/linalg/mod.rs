//! Sparse linear algebra substrate.
//!
//! Everything here is deterministic: no randomized pivoting, and the only
//! randomness (power iteration start vectors) is drawn from a caller-provided
//! seed. Factorizations are hand-rolled simplicial algorithms; the problem
//! sizes this crate targets (thousands of unknowns) do not need supernodal
//! machinery.

mod cg;
mod cholesky;
mod lu;
mod market;
mod operator;
mod sparse;
mod spectral;
pub mod vecops;

pub use cg::{cg_solve, CgOutcome, CgStatus};
pub use cholesky::SpdFactor;
pub use lu::GeneralFactor;
pub use market::{read_matrix_market, write_matrix_market};
pub use operator::LinearOperator;
pub use sparse::{SparseBuilder, SparseMatrix};
pub use spectral::estimate_spectral_norm;

use thiserror::Error;

/// Errors of the linear algebra layer.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (first mismatch at row {row}, col {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix is not positive definite (nonpositive pivot at row {row})")]
    NotPositiveDefinite { row: usize },
    #[error("matrix is singular to working precision (no pivot for column {col})")]
    Singular { col: usize },
    #[error("matrix market parse error at line {line}: {message}")]
    MarketParse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
