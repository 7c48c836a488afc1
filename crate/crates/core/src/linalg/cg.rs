use super::{vecops, LinearOperator};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStatus {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct CgOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    pub status: CgStatus,
}

/// Conjugate gradients for a symmetric positive definite operator, run until
/// ‖b − Ax‖ ≤ tol·‖b‖ or the iteration cap.
pub fn cg_solve<T: Real>(
    op: &impl LinearOperator<T>,
    b: &[T],
    x0: &[T],
    tol: T,
    max_iterations: usize,
) -> CgOutcome<T> {
    let n = op.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x0.len(), n);
    let mut x = x0.to_vec();
    let target = tol * vecops::norm2(b);

    let mut r = vec![T::zero(); n];
    op.apply(&x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b.iter()) {
        *ri = bi - *ri;
    }
    let mut rho = vecops::dot(&r, &r);
    if rho.sqrt() <= target {
        return CgOutcome {
            solution: x,
            iterations: 0,
            status: CgStatus::Converged,
        };
    }

    let mut p = r.clone();
    let mut ap = vec![T::zero(); n];
    for iteration in 1..=max_iterations {
        op.apply(&p, &mut ap);
        let alpha = rho / vecops::dot(&p, &ap);
        vecops::axpy(alpha, &p, &mut x);
        vecops::axpy(-alpha, &ap, &mut r);
        let rho_next = vecops::dot(&r, &r);
        if rho_next.sqrt() <= target {
            return CgOutcome {
                solution: x,
                iterations: iteration,
                status: CgStatus::Converged,
            };
        }
        let beta = rho_next / rho;
        rho = rho_next;
        for (pi, &ri) in p.iter_mut().zip(r.iter()) {
            *pi = ri + beta * *pi;
        }
    }
    CgOutcome {
        solution: x,
        iterations: max_iterations,
        status: CgStatus::MaxIterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_converges_immediately() {
        let a = SparseMatrix::<f64>::identity(4);
        let b = [1.0, 2.0, 3.0, 4.0];
        let out = cg_solve(&a, &b, &[0.0; 4], 1e-12, 100);
        assert_eq!(out.status, CgStatus::Converged);
        assert!(out.iterations <= 1);
        for (xi, bi) in out.solution.iter().zip(b.iter()) {
            assert!((xi - bi).abs() <= 1e-12);
        }
    }

    #[test]
    fn diagonal_system() {
        let a = SparseMatrix::<f64>::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]);
        let out = cg_solve(&a, &[1.0, 2.0, 3.0], &[0.0; 3], 1e-14, 100);
        assert_eq!(out.status, CgStatus::Converged);
        for (xi, want) in out.solution.iter().zip([1.0, 1.0, 1.0]) {
            assert!((xi - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_rhs_returns_start() {
        let a = SparseMatrix::identity(3);
        let out = cg_solve(&a, &[0.0; 3], &[0.0; 3], 1e-12, 100);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.solution, vec![0.0; 3]);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 2.0)]);
        let out = cg_solve(&a, &[1.0, 1.0], &[0.0; 2], 1e-16, 1);
        assert_eq!(out.status, CgStatus::MaxIterations);
        assert_eq!(out.iterations, 1);
    }

    /// The error is monotone in the energy norm, a defining property of the
    /// method that plain residual checks would miss.
    #[test]
    fn energy_norm_error_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for _ in 0..n {
            cols.push((0..n).map(|_| rng.gen::<f64>() - 0.5).collect());
        }
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut acc: f64 = (0..n).map(|k| cols[k][i] * cols[k][j]).sum();
                if i == j {
                    acc += 1.0;
                }
                triplets.push((i, j, acc));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &triplets);
        let x_true: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let b = a.multiply(&x_true).unwrap();

        let energy = |x: &[f64]| {
            let e: Vec<f64> = x.iter().zip(&x_true).map(|(a, b)| a - b).collect();
            let ae = a.multiply(&e).unwrap();
            vecops::dot(&e, &ae)
        };
        let mut prev = energy(&vec![0.0; n]);
        for iters in 1..=n {
            let out = cg_solve(&a, &b, &vec![0.0; n], 0.0, iters);
            let now = energy(&out.solution);
            assert!(
                now <= prev * (1.0 + 1e-12) + 1e-30,
                "energy error grew at iteration {iters}: {prev} -> {now}"
            );
            prev = now;
        }
        assert!(prev <= 1e-16, "did not reach the solution after n steps");
    }
}
