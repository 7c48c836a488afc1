//! Shared oracle machinery for integration tests: dense linear algebra kept
//! deliberately independent of the crate's sparse kernels, a brute-force
//! active-set oracle for nonnegativity-constrained QPs, and a dense
//! log-barrier interior-point oracle for inequality-constrained QPs.
#![allow(dead_code)]

use porofrac::linalg::SparseMatrix;

pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(aij, xj)| aij * xj).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting; None on (near-)singularity.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for k in 0..n {
        let pivot_row = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[pivot_row][k].abs() < 1e-300 {
            return None;
        }
        a.swap(k, pivot_row);
        rhs.swap(k, pivot_row);
        for i in k + 1..n {
            let factor = a[i][k] / a[k][k];
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= factor * a[k][j];
            }
            rhs[i] -= factor * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in k + 1..n {
            acc -= a[k][j] * x[j];
        }
        x[k] = acc / a[k][k];
    }
    Some(x)
}

pub fn sparse_from_dense(a: &[Vec<f64>]) -> SparseMatrix<f64> {
    let mut triplets = Vec::new();
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                triplets.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(a.len(), a.first().map_or(0, Vec::len), &triplets)
}

/// Well-conditioned random SPD matrix MᵀM + shift·I.
pub fn random_spd_dense(n: usize, shift: f64, rng: &mut impl rand::Rng) -> Vec<Vec<f64>> {
    let m: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
        .collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let dot: f64 = (0..n).map(|k| m[k][i] * m[k][j]).sum();
                    if i == j {
                        dot + shift
                    } else {
                        dot
                    }
                })
                .collect()
        })
        .collect()
}

/// Exact minimizer of ½λᵀFλ − dᵀλ over λ ≥ 0 by trying every active set:
/// fix λ = 0 on the set, solve the free block, and keep the first candidate
/// whose multipliers and gradient signs satisfy the optimality conditions.
pub fn enumerate_nonneg_qp(f: &[Vec<f64>], d: &[f64]) -> Option<Vec<f64>> {
    let n = d.len();
    assert!(n <= 20, "enumeration is exponential in n");
    let scale = 1.0 + d.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    for mask in 0..(1u32 << n) {
        let free: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) == 0).collect();
        let reduced: Vec<Vec<f64>> = free
            .iter()
            .map(|&i| free.iter().map(|&j| f[i][j]).collect())
            .collect();
        let rhs: Vec<f64> = free.iter().map(|&i| d[i]).collect();
        let Some(solution) = dense_solve(reduced, rhs) else {
            continue;
        };
        if solution.iter().any(|&v| v < -tol) {
            continue;
        }
        let mut lambda = vec![0.0; n];
        for (&j, &v) in free.iter().zip(&solution) {
            lambda[j] = v.max(0.0);
        }
        let gradient: Vec<f64> = dense_matvec(f, &lambda)
            .into_iter()
            .zip(d)
            .map(|(fl, dj)| fl - dj)
            .collect();
        let optimal = (0..n).all(|j| {
            if mask & (1 << j) != 0 {
                gradient[j] >= -tol
            } else {
                gradient[j].abs() <= tol * (1.0 + f[j][j])
            }
        });
        if optimal {
            return Some(lambda);
        }
    }
    None
}

pub struct IpmSolution {
    pub x: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub duality_gap: f64,
}

/// Dense log-barrier interior-point solver for
/// min ½xᵀAx − bᵀx subject to Bx ≤ c, followed by an active-set polish so
/// the answer is exact to linear-solve precision. Requires a nonempty strict
/// interior and B of full row rank (used to construct the feasible start).
pub fn interior_point_qp(
    a: &[Vec<f64>],
    b: &[f64],
    bmat: &[Vec<f64>],
    c: &[f64],
) -> IpmSolution {
    let n = b.len();
    let m = c.len();
    if m == 0 {
        let x = dense_solve(a.to_vec(), b.to_vec()).expect("oracle Hessian must be SPD");
        return IpmSolution {
            x,
            multipliers: vec![],
            duality_gap: 0.0,
        };
    }

    // strictly feasible start: least-squares correction of the unconstrained
    // optimum so every slack equals one
    let unconstrained = dense_solve(a.to_vec(), b.to_vec()).expect("oracle Hessian must be SPD");
    let violation: Vec<f64> = dense_matvec(bmat, &unconstrained)
        .into_iter()
        .zip(c)
        .map(|(bx, &ci)| bx - ci + 1.0)
        .collect();
    let gram: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| (0..n).map(|k| bmat[i][k] * bmat[j][k]).sum())
                .collect()
        })
        .collect();
    let weights = dense_solve(gram, violation).expect("constraint rows must be independent");
    let mut x: Vec<f64> = (0..n)
        .map(|k| unconstrained[k] - (0..m).map(|i| weights[i] * bmat[i][k]).sum::<f64>())
        .collect();

    let slack = |x: &[f64]| -> Vec<f64> {
        dense_matvec(bmat, x)
            .into_iter()
            .zip(c)
            .map(|(bx, &ci)| ci - bx)
            .collect()
    };
    let barrier = |t: f64, x: &[f64]| -> f64 {
        let s = slack(x);
        if s.iter().any(|&si| si <= 0.0) {
            return f64::INFINITY;
        }
        let ax = dense_matvec(a, x);
        let quad = 0.5 * x.iter().zip(&ax).map(|(xi, axi)| xi * axi).sum::<f64>()
            - b.iter().zip(x).map(|(bi, xi)| bi * xi).sum::<f64>();
        t * quad - s.iter().map(|si| si.ln()).sum::<f64>()
    };

    let mut t = 1.0;
    let mut s = slack(&x);
    assert!(s.iter().all(|&si| si > 0.0), "start must be strictly feasible");
    while (m as f64) / t >= 1e-11 {
        for _ in 0..80 {
            s = slack(&x);
            let ax = dense_matvec(a, &x);
            let grad: Vec<f64> = (0..n)
                .map(|k| {
                    t * (ax[k] - b[k]) + (0..m).map(|i| bmat[i][k] / s[i]).sum::<f64>()
                })
                .collect();
            let hess: Vec<Vec<f64>> = (0..n)
                .map(|k| {
                    (0..n)
                        .map(|l| {
                            t * a[k][l]
                                + (0..m)
                                    .map(|i| bmat[i][k] * bmat[i][l] / (s[i] * s[i]))
                                    .sum::<f64>()
                        })
                        .collect()
                })
                .collect();
            let step = dense_solve(hess, grad.iter().map(|g| -g).collect())
                .expect("barrier Hessian is positive definite");
            let decrement = -grad.iter().zip(&step).map(|(g, p)| g * p).sum::<f64>();
            if decrement * 0.5 <= 1e-13 * (1.0 + t) {
                break;
            }
            let bstep = dense_matvec(bmat, &step);
            let mut alpha = 1.0f64;
            for i in 0..m {
                if bstep[i] > 0.0 {
                    alpha = alpha.min(0.99 * s[i] / bstep[i]);
                }
            }
            let base = barrier(t, &x);
            let mut trial: Vec<f64>;
            loop {
                trial = x.iter().zip(&step).map(|(xi, pi)| xi + alpha * pi).collect();
                if barrier(t, &trial) <= base - 0.25 * alpha * decrement || alpha < 1e-14 {
                    break;
                }
                alpha *= 0.5;
            }
            x = trial;
        }
        t *= 10.0;
    }
    s = slack(&x);
    let multipliers: Vec<f64> = s.iter().map(|&si| 1.0 / (t / 10.0 * si)).collect();
    let gap = multipliers.iter().zip(&s).map(|(l, si)| l * si).sum::<f64>();

    polish(a, b, bmat, c, &x).unwrap_or(IpmSolution {
        x,
        multipliers,
        duality_gap: gap,
    })
}

/// Re-solves the equality-constrained KKT system on the active set guessed
/// from the barrier solution; verified before being accepted.
fn polish(
    a: &[Vec<f64>],
    b: &[f64],
    bmat: &[Vec<f64>],
    c: &[f64],
    x_barrier: &[f64],
) -> Option<IpmSolution> {
    let n = b.len();
    let m = c.len();
    let s: Vec<f64> = dense_matvec(bmat, x_barrier)
        .into_iter()
        .zip(c)
        .map(|(bx, &ci)| ci - bx)
        .collect();
    let active: Vec<usize> = (0..m)
        .filter(|&i| s[i] < 1e-5 * (1.0 + c[i].abs()))
        .collect();
    let k = active.len();
    let mut kkt = vec![vec![0.0; n + k]; n + k];
    let mut rhs = vec![0.0; n + k];
    for i in 0..n {
        kkt[i][..n].copy_from_slice(&a[i]);
        rhs[i] = b[i];
    }
    for (row, &i) in active.iter().enumerate() {
        for j in 0..n {
            kkt[j][n + row] = bmat[i][j];
            kkt[n + row][j] = bmat[i][j];
        }
        rhs[n + row] = c[i];
    }
    let solution = dense_solve(kkt, rhs)?;
    let x = solution[..n].to_vec();
    let mut multipliers = vec![0.0; m];
    for (row, &i) in active.iter().enumerate() {
        multipliers[i] = solution[n + row];
    }
    let scale = 1.0 + c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let feasible = dense_matvec(bmat, &x)
        .iter()
        .zip(c)
        .all(|(bx, ci)| *bx <= ci + 1e-9 * scale);
    let signs_ok = multipliers.iter().all(|&l| l >= -1e-9);
    let close = x
        .iter()
        .zip(x_barrier)
        .all(|(p, q)| (p - q).abs() <= 1e-3 * (1.0 + q.abs()));
    if feasible && signs_ok && close {
        Some(IpmSolution {
            x,
            multipliers,
            duality_gap: 0.0,
        })
    } else {
        None
    }
}

/// One homogeneous unit-conductivity material with a passive fracture set,
/// for flow-only end-to-end tests.
pub fn unit_flow_params() -> porofrac::assembly::HmParameters<f64> {
    porofrac::assembly::HmParameters {
        regions: vec![porofrac::assembly::RegionParameters {
            youngs_modulus: 1.0,
            poisson_ratio: 0.0,
            biot_coefficient: 1.0,
            storativity: 0.0,
            conductivity: 1.0,
        }],
        fracture: porofrac::assembly::FractureParameters {
            youngs_modulus: 1.0,
            poisson_ratio: 0.0,
            biot_coefficient: 1.0,
            storativity: 0.0,
            roughness: 1.0,
            viscosity: 1e-3,
            fluid_density: 1000.0,
            gravity: 9.81,
            min_cross_section: 1e-6,
        },
        initial_stress: [0.0; 3],
        head_scale: 1.0,
        body_force: [0.0; 2],
        matrix_source: 0.0,
        fracture_source: 0.0,
        conductivity_override: None,
    }
}
