//! Quadratic programming for the contact subproblem.
//!
//! The mechanics step minimizes a strictly convex energy subject to linear
//! non-penetration inequalities. [`dualize`] turns that into a bound
//! constrained program in the contact multipliers, whose Hessian is applied
//! implicitly through a Cholesky factor of the energy Hessian. [`mpgp_solve`]
//! handles the bound constrained program with an active-set gradient
//! projection method; [`recover_primal`] maps the multipliers back to
//! displacements.

mod dual;
mod mpgp;

pub use dual::{dualize, recover_primal, DualQP, InequalityQP};
pub use mpgp::{
    gradient_split, max_feasible_step, mpgp_solve, project_box, BoxQP, MpgpResult, MpgpSettings,
    MpgpStatus, Steplength,
};
pub(crate) use mpgp::{POWER_ITERATIONS, POWER_SEED};

use crate::linalg::LinalgError;

#[derive(Debug, thiserror::Error)]
pub enum QpError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid bounds at component {index}: lower exceeds upper")]
    InvalidBounds { index: usize },
    #[error("point violates its bounds at component {index}")]
    InfeasiblePoint { index: usize },
    #[error("invalid solver settings: {message}")]
    InvalidSettings { message: String },
    #[error("non-finite value encountered during iteration")]
    NonFinite,
    #[error("factorization of the primal Hessian failed: {0}")]
    Factorization(#[from] LinalgError),
    #[error("trace output failed: {0}")]
    Io(#[from] std::io::Error),
}
