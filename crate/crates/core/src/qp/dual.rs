use super::mpgp::BoxQP;
use super::QpError;
use crate::linalg::{vecops, LinearOperator, SparseMatrix, SpdFactor};
use crate::Real;
use std::sync::atomic::{AtomicUsize, Ordering};

/// min ½xᵀAx − bᵀx subject to B x ≤ c, with A symmetric positive definite.
#[derive(Debug, Clone)]
pub struct InequalityQP<T> {
    pub hessian: SparseMatrix<T>,
    pub linear: Vec<T>,
    pub constraints: SparseMatrix<T>,
    pub bounds: Vec<T>,
}

/// The dual of an [`InequalityQP`]: a nonnegativity-constrained program in
/// the constraint multipliers whose Hessian B A⁻¹ Bᵀ is applied implicitly
/// through a Cholesky factor of A. Applying the operator is the dominant
/// cost, so applications are counted.
#[derive(Debug)]
pub struct DualQP<T> {
    factor: SpdFactor<T>,
    constraints: SparseMatrix<T>,
    constraint_bounds: Vec<T>,
    primal_linear: Vec<T>,
    pub linear: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    applications: AtomicUsize,
}

/// Transforms an inequality constrained QP into its dual bound constrained
/// form: Hessian B A⁻¹ Bᵀ, linear term B A⁻¹ b − c, bounds [0, +∞).
pub fn dualize<T: Real>(problem: InequalityQP<T>) -> Result<DualQP<T>, QpError> {
    let n = problem.hessian.n_rows();
    let m = problem.constraints.n_rows();
    if problem.constraints.n_cols() != n {
        return Err(QpError::DimensionMismatch {
            expected: n,
            got: problem.constraints.n_cols(),
        });
    }
    if problem.linear.len() != n {
        return Err(QpError::DimensionMismatch {
            expected: n,
            got: problem.linear.len(),
        });
    }
    if problem.bounds.len() != m {
        return Err(QpError::DimensionMismatch {
            expected: m,
            got: problem.bounds.len(),
        });
    }
    let factor = SpdFactor::new(&problem.hessian)?;
    let mut dual = DualQP {
        factor,
        constraints: problem.constraints,
        constraint_bounds: problem.bounds,
        primal_linear: Vec::new(),
        linear: Vec::new(),
        lower: vec![T::zero(); m],
        upper: vec![T::infinity(); m],
        applications: AtomicUsize::new(0),
    };
    dual.set_primal_linear(problem.linear)?;
    Ok(dual)
}

impl<T: Real> DualQP<T> {
    /// Number of constraint multipliers.
    pub fn dual_dim(&self) -> usize {
        self.constraints.n_rows()
    }

    /// Number of primal unknowns.
    pub fn primal_dim(&self) -> usize {
        self.constraints.n_cols()
    }

    /// Replaces the primal linear term and refreshes the dual one. The
    /// factorization and constraints are reused, which is what makes warm
    /// starting across time steps cheap.
    pub fn set_primal_linear(&mut self, b: Vec<T>) -> Result<(), QpError> {
        if b.len() != self.primal_dim() {
            return Err(QpError::DimensionMismatch {
                expected: self.primal_dim(),
                got: b.len(),
            });
        }
        let unconstrained = self.factor.solve(&b)?;
        let mut d = self.constraints.multiply(&unconstrained)?;
        for (dj, &cj) in d.iter_mut().zip(self.constraint_bounds.iter()) {
            *dj -= cj;
        }
        self.primal_linear = b;
        self.linear = d;
        Ok(())
    }

    /// Replaces the constraint bounds and refreshes the dual linear term,
    /// reusing the factorization. Needed when time-dependent boundary values
    /// shift the constraint right side between solves.
    pub fn set_constraint_bounds(&mut self, c: Vec<T>) -> Result<(), QpError> {
        if c.len() != self.dual_dim() {
            return Err(QpError::DimensionMismatch {
                expected: self.dual_dim(),
                got: c.len(),
            });
        }
        self.constraint_bounds = c;
        let b = std::mem::take(&mut self.primal_linear);
        self.set_primal_linear(b)
    }

    /// Total operator applications so far, including any spent on steplength
    /// estimation.
    pub fn hessian_applications(&self) -> usize {
        self.applications.load(Ordering::Relaxed)
    }

    pub fn reset_application_count(&self) {
        self.applications.store(0, Ordering::Relaxed);
    }

    /// View as the box constrained program the solver consumes.
    pub fn box_qp(&self) -> BoxQP<&DualQP<T>, T> {
        BoxQP {
            hessian: self,
            linear: self.linear.clone(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }
}

impl<T: Real> LinearOperator<T> for DualQP<T> {
    fn dim(&self) -> usize {
        self.dual_dim()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.applications.fetch_add(1, Ordering::Relaxed);
        let mut lifted = vec![T::zero(); self.primal_dim()];
        self.constraints.multiply_transpose_into(x, &mut lifted);
        self.factor.solve_in_place(&mut lifted);
        self.constraints.multiply_into(&lifted, y);
    }
}

/// Maps converged multipliers back to the primal solution x = A⁻¹(b − Bᵀλ).
pub fn recover_primal<T: Real>(dual: &DualQP<T>, multipliers: &[T]) -> Result<Vec<T>, QpError> {
    if multipliers.len() != dual.dual_dim() {
        return Err(QpError::DimensionMismatch {
            expected: dual.dual_dim(),
            got: multipliers.len(),
        });
    }
    let pulled = dual.constraints.multiply_transpose(multipliers)?;
    let mut rhs = dual.primal_linear.clone();
    vecops::axpy(-T::one(), &pulled, &mut rhs);
    dual.factor.solve_in_place(&mut rhs);
    Ok(rhs)
}
