use super::QpError;
use crate::linalg::{estimate_spectral_norm, vecops, LinearOperator};
use crate::Real;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

/// min ½λᵀFλ − dᵀλ subject to l ≤ λ ≤ u, with ±∞ bound entries allowed.
#[derive(Debug, Clone)]
pub struct BoxQP<O, T> {
    pub hessian: O,
    pub linear: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real, O: LinearOperator<T>> BoxQP<O, T> {
    fn validate(&self) -> Result<(), QpError> {
        let n = self.hessian.dim();
        for (len, _) in [
            (self.linear.len(), "linear"),
            (self.lower.len(), "lower"),
            (self.upper.len(), "upper"),
        ] {
            if len != n {
                return Err(QpError::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        for j in 0..n {
            if !(self.lower[j] <= self.upper[j]) {
                return Err(QpError::InvalidBounds { index: j });
            }
        }
        Ok(())
    }
}

/// Expansion steplength ᾱ: fixed, or 1.9/(1.1·‖F‖) with ‖F‖ from power
/// iteration. The inflation keeps the product inside (0, 2/‖F‖] even though
/// the estimate approaches the norm from below.
#[derive(Debug, Clone, Copy)]
pub enum Steplength<T> {
    Auto,
    Fixed(T),
}

pub(crate) const POWER_ITERATIONS: usize = 40;
pub(crate) const POWER_SEED: u64 = 0x6d70_6770;

#[derive(Debug, Clone)]
pub struct MpgpSettings<T> {
    /// threshold deciding when the chopped gradient dominates and a
    /// proportioning step is taken
    pub proportioning_parameter: T,
    pub expansion_steplength: Steplength<T>,
    /// stop once ‖gᴾ‖ < tolerance·‖d‖ (absolute when d = 0)
    pub relative_tolerance: T,
    /// cap on Hessian multiplications; `None` means 10·n
    pub max_hessian_multiplications: Option<usize>,
    /// when set, per-iteration records are appended there as CSV
    pub trace_path: Option<PathBuf>,
}

impl<T: Real> Default for MpgpSettings<T> {
    fn default() -> Self {
        MpgpSettings {
            proportioning_parameter: T::one(),
            expansion_steplength: Steplength::Auto,
            relative_tolerance: T::of(1e-8),
            max_hessian_multiplications: None,
            trace_path: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpgpStatus {
    Converged,
    HessianMultCap,
}

#[derive(Debug, Clone)]
pub struct MpgpResult<T> {
    pub multipliers: Vec<T>,
    pub status: MpgpStatus,
    pub cg_steps: usize,
    pub expansion_steps: usize,
    pub proportioning_steps: usize,
    /// one multiplication per CG or proportioning step, two per expansion
    /// step, plus one for the initial gradient
    pub hessian_multiplications: usize,
    pub projected_gradient_norm: T,
}

/// Componentwise clamp onto [l, u].
pub fn project_box<T: Real>(point: &[T], lower: &[T], upper: &[T]) -> Vec<T> {
    assert_eq!(point.len(), lower.len());
    assert_eq!(point.len(), upper.len());
    point
        .iter()
        .zip(lower.iter().zip(upper.iter()))
        .map(|(&x, (&l, &u))| x.max(l).min(u))
        .collect()
}

fn clamp_in_place<T: Real>(point: &mut [T], lower: &[T], upper: &[T]) {
    for ((x, &l), &u) in point.iter_mut().zip(lower).zip(upper) {
        *x = (*x).max(l).min(u);
    }
}

/// Splits the gradient at a feasible point into its free and chopped parts.
///
/// Free part: zero where a bound is active, the gradient elsewhere. Chopped
/// part: min(g, 0) at the lower bound, max(g, 0) at the upper bound, zero in
/// the interior. A pinned component (l = u) contributes to neither. The sum
/// of the two is the projected gradient.
pub fn gradient_split<T: Real>(
    gradient: &[T],
    point: &[T],
    lower: &[T],
    upper: &[T],
) -> Result<(Vec<T>, Vec<T>), QpError> {
    assert_eq!(gradient.len(), point.len());
    for j in 0..point.len() {
        if !(point[j] >= lower[j]) || !(point[j] <= upper[j]) {
            return Err(QpError::InfeasiblePoint { index: j });
        }
    }
    let mut free = vec![T::zero(); gradient.len()];
    let mut chopped = vec![T::zero(); gradient.len()];
    split_into(gradient, point, lower, upper, &mut free, &mut chopped);
    Ok((free, chopped))
}

fn split_into<T: Real>(g: &[T], point: &[T], lower: &[T], upper: &[T], free: &mut [T], chopped: &mut [T]) {
    for j in 0..g.len() {
        let at_lower = point[j] <= lower[j];
        let at_upper = point[j] >= upper[j];
        free[j] = if at_lower || at_upper { T::zero() } else { g[j] };
        chopped[j] = if at_lower && at_upper {
            T::zero()
        } else if at_lower {
            g[j].min(T::zero())
        } else if at_upper {
            g[j].max(T::zero())
        } else {
            T::zero()
        };
    }
}

/// Largest α ≥ 0 with λ − αp still inside the box; +∞ if the ray never exits.
pub fn max_feasible_step<T: Real>(point: &[T], direction: &[T], lower: &[T], upper: &[T]) -> T {
    assert_eq!(point.len(), direction.len());
    let mut step = T::infinity();
    for j in 0..point.len() {
        let p = direction[j];
        let exit = if p > T::zero() {
            (point[j] - lower[j]) / p
        } else if p < T::zero() {
            (point[j] - upper[j]) / p
        } else {
            continue;
        };
        if exit < step {
            step = exit;
        }
    }
    step.max(T::zero())
}

struct Trace {
    out: BufWriter<std::fs::File>,
}

impl Trace {
    fn open(path: &std::path::Path) -> Result<Self, QpError> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "iteration,step_type,proj_grad_norm,objective")?;
        Ok(Trace { out })
    }

    fn row<T: Real>(&mut self, iteration: usize, step: &str, pg: T, objective: T) -> Result<(), QpError> {
        writeln!(self.out, "{iteration},{step},{pg:.17e},{objective:.17e}")?;
        Ok(())
    }
}

/// Active-set gradient projection solver for box constrained QPs.
///
/// Alternates three step kinds. While the chopped gradient is small relative
/// to the free one, minimize over the current face by conjugate gradients;
/// when a CG step would leave the box, walk to the boundary and expand the
/// active set with a fixed-steplength projected gradient step; otherwise take
/// a proportioning step releasing wrongly active components. The start is
/// projected onto the box once; every later iterate stays feasible exactly.
pub fn mpgp_solve<T: Real, O: LinearOperator<T>>(
    qp: &BoxQP<O, T>,
    start: &[T],
    settings: &MpgpSettings<T>,
) -> Result<MpgpResult<T>, QpError> {
    qp.validate()?;
    let n = qp.linear.len();
    if start.len() != n {
        return Err(QpError::DimensionMismatch {
            expected: n,
            got: start.len(),
        });
    }
    let gamma = settings.proportioning_parameter;
    if !(gamma > T::zero()) || !gamma.is_finite() {
        return Err(QpError::InvalidSettings {
            message: "proportioning parameter must be positive and finite".into(),
        });
    }
    if !(settings.relative_tolerance >= T::zero()) {
        return Err(QpError::InvalidSettings {
            message: "tolerance must be nonnegative".into(),
        });
    }
    if n == 0 {
        return Ok(MpgpResult {
            multipliers: Vec::new(),
            status: MpgpStatus::Converged,
            cg_steps: 0,
            expansion_steps: 0,
            proportioning_steps: 0,
            hessian_multiplications: 0,
            projected_gradient_norm: T::zero(),
        });
    }
    let expansion_step = match settings.expansion_steplength {
        Steplength::Fixed(a) => {
            if !(a > T::zero()) || !a.is_finite() {
                return Err(QpError::InvalidSettings {
                    message: "fixed expansion steplength must be positive and finite".into(),
                });
            }
            a
        }
        Steplength::Auto => {
            let norm = estimate_spectral_norm(&qp.hessian, POWER_ITERATIONS, POWER_SEED);
            if norm.is_zero() {
                T::one()
            } else {
                T::of(1.9) / (T::of(1.1) * norm)
            }
        }
    };
    let cap = settings.max_hessian_multiplications.unwrap_or(10 * n);
    let mut trace = match &settings.trace_path {
        Some(path) => Some(Trace::open(path)?),
        None => None,
    };

    let d = &qp.linear;
    let d_norm = vecops::norm2(d);
    let target = if d_norm.is_zero() {
        settings.relative_tolerance
    } else {
        settings.relative_tolerance * d_norm
    };

    let mut lambda = project_box(start, &qp.lower, &qp.upper);
    let mut g = vec![T::zero(); n];
    qp.hessian.apply(&lambda, &mut g);
    let mut mults = 1usize;
    for (gj, &dj) in g.iter_mut().zip(d.iter()) {
        *gj -= dj;
    }
    let mut g_free = vec![T::zero(); n];
    let mut g_chop = vec![T::zero(); n];
    split_into(&g, &lambda, &qp.lower, &qp.upper, &mut g_free, &mut g_chop);
    let mut p = g_free.clone();
    let mut fp = vec![T::zero(); n];

    let mut cg_steps = 0usize;
    let mut expansion_steps = 0usize;
    let mut proportioning_steps = 0usize;
    let mut iteration = 0usize;
    let mut last_step = "init";
    let status;
    let pg_norm;
    loop {
        // free and chopped parts have disjoint supports
        let free_sq = vecops::dot(&g_free, &g_free);
        let chop_sq = vecops::dot(&g_chop, &g_chop);
        let pg = (free_sq + chop_sq).sqrt();
        if !pg.is_finite() {
            return Err(QpError::NonFinite);
        }
        if let Some(t) = trace.as_mut() {
            let objective = T::of(0.5) * (vecops::dot(&lambda, &g) - vecops::dot(d, &lambda));
            t.row(iteration, last_step, pg, objective)?;
        }
        if pg < target {
            status = MpgpStatus::Converged;
            pg_norm = pg;
            break;
        }
        if mults >= cap {
            status = MpgpStatus::HessianMultCap;
            pg_norm = pg;
            break;
        }

        if chop_sq <= gamma * gamma * free_sq {
            qp.hessian.apply(&p, &mut fp);
            mults += 1;
            let curvature = vecops::dot(&p, &fp);
            if !(curvature > T::zero()) || !curvature.is_finite() {
                return Err(QpError::NonFinite);
            }
            let alpha_cg = vecops::dot(&g, &p) / curvature;
            let alpha_feasible = max_feasible_step(&lambda, &p, &qp.lower, &qp.upper);
            if alpha_cg <= alpha_feasible {
                // conjugate gradient step inside the current face
                vecops::axpy(-alpha_cg, &p, &mut lambda);
                clamp_in_place(&mut lambda, &qp.lower, &qp.upper);
                vecops::axpy(-alpha_cg, &fp, &mut g);
                split_into(&g, &lambda, &qp.lower, &qp.upper, &mut g_free, &mut g_chop);
                let beta = vecops::dot(&fp, &g_free) / curvature;
                for (pj, &gf) in p.iter_mut().zip(g_free.iter()) {
                    *pj = gf - beta * *pj;
                }
                cg_steps += 1;
                last_step = "cg";
            } else {
                // walk to the boundary, then expand the active set with a
                // fixed-steplength gradient step on the free part
                vecops::axpy(-alpha_feasible, &p, &mut lambda);
                clamp_in_place(&mut lambda, &qp.lower, &qp.upper);
                vecops::axpy(-alpha_feasible, &fp, &mut g);
                split_into(&g, &lambda, &qp.lower, &qp.upper, &mut g_free, &mut g_chop);
                vecops::axpy(-expansion_step, &g_free, &mut lambda);
                clamp_in_place(&mut lambda, &qp.lower, &qp.upper);
                qp.hessian.apply(&lambda, &mut g);
                mults += 1;
                for (gj, &dj) in g.iter_mut().zip(d.iter()) {
                    *gj -= dj;
                }
                split_into(&g, &lambda, &qp.lower, &qp.upper, &mut g_free, &mut g_chop);
                p.copy_from_slice(&g_free);
                expansion_steps += 1;
                last_step = "expansion";
            }
        } else {
            // proportioning step: release wrongly active components along
            // the chopped gradient, capped at the box exit so finite upper
            // bounds cannot be overrun
            qp.hessian.apply(&g_chop, &mut fp);
            mults += 1;
            let curvature = vecops::dot(&g_chop, &fp);
            if !(curvature > T::zero()) || !curvature.is_finite() {
                return Err(QpError::NonFinite);
            }
            let alpha = (vecops::dot(&g, &g_chop) / curvature)
                .min(max_feasible_step(&lambda, &g_chop, &qp.lower, &qp.upper));
            vecops::axpy(-alpha, &g_chop, &mut lambda);
            clamp_in_place(&mut lambda, &qp.lower, &qp.upper);
            vecops::axpy(-alpha, &fp, &mut g);
            split_into(&g, &lambda, &qp.lower, &qp.upper, &mut g_free, &mut g_chop);
            p.copy_from_slice(&g_free);
            proportioning_steps += 1;
            last_step = "proportioning";
        }
        iteration += 1;
    }

    Ok(MpgpResult {
        multipliers: lambda,
        status,
        cg_steps,
        expansion_steps,
        proportioning_steps,
        hessian_multiplications: mults,
        projected_gradient_norm: pg_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;

    fn settings() -> MpgpSettings<f64> {
        MpgpSettings::default()
    }

    fn diag(entries: &[f64]) -> SparseMatrix<f64> {
        let triplets: Vec<_> = entries.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        SparseMatrix::from_triplets(entries.len(), entries.len(), &triplets)
    }

    #[test]
    fn split_at_lower_bound() {
        let (f, c) = gradient_split(&[3.0], &[0.0], &[0.0], &[f64::INFINITY]).unwrap();
        assert_eq!((f, c), (vec![0.0], vec![0.0]));
        let (f, c) = gradient_split(&[-3.0], &[0.0], &[0.0], &[f64::INFINITY]).unwrap();
        assert_eq!((f, c), (vec![0.0], vec![-3.0]));
    }

    #[test]
    fn split_in_interior() {
        let (f, c) = gradient_split(&[7.0], &[1.0], &[0.0], &[2.0]).unwrap();
        assert_eq!((f, c), (vec![7.0], vec![0.0]));
    }

    #[test]
    fn split_rejects_infeasible_point() {
        assert!(matches!(
            gradient_split(&[1.0], &[-1.0], &[0.0], &[2.0]),
            Err(QpError::InfeasiblePoint { index: 0 })
        ));
    }

    #[test]
    fn projection_clamps_and_is_idempotent() {
        assert_eq!(project_box(&[-1.0], &[0.0], &[f64::INFINITY]), vec![0.0]);
        assert_eq!(project_box(&[1.5], &[0.0], &[2.0]), vec![1.5]);
        assert_eq!(project_box(&[5.0], &[0.0], &[2.0]), vec![2.0]);
        let once = project_box(&[5.0, -3.0], &[0.0, 0.0], &[2.0, 2.0]);
        assert_eq!(project_box(&once, &[0.0, 0.0], &[2.0, 2.0]), once);
    }

    #[test]
    fn feasible_step_examples() {
        assert_eq!(max_feasible_step(&[1.0], &[2.0], &[0.0], &[f64::INFINITY]), 0.5);
        assert_eq!(
            max_feasible_step(&[1.0], &[0.0], &[0.0], &[f64::INFINITY]),
            f64::INFINITY
        );
        assert_eq!(
            max_feasible_step(&[1.0, 3.0], &[1.0, -1.0], &[0.0, 0.0], &[f64::INFINITY, 4.0]),
            1.0
        );
    }

    #[test]
    fn interior_minimizer() {
        let qp = BoxQP {
            hessian: diag(&[2.0]),
            linear: vec![2.0],
            lower: vec![0.0],
            upper: vec![f64::INFINITY],
        };
        let out = mpgp_solve(&qp, &[0.0], &settings()).unwrap();
        assert_eq!(out.status, MpgpStatus::Converged);
        assert!((out.multipliers[0] - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn bound_active_minimizer() {
        let qp = BoxQP {
            hessian: diag(&[2.0]),
            linear: vec![-2.0],
            lower: vec![0.0],
            upper: vec![f64::INFINITY],
        };
        let out = mpgp_solve(&qp, &[3.0], &settings()).unwrap();
        assert_eq!(out.status, MpgpStatus::Converged);
        assert_eq!(out.multipliers[0], 0.0);
    }

    #[test]
    fn separable_problem_clamps_componentwise() {
        let qp = BoxQP {
            hessian: diag(&[1.0, 2.0]),
            linear: vec![-1.0, 4.0],
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY, f64::INFINITY],
        };
        let out = mpgp_solve(&qp, &[1.0, 0.0], &settings()).unwrap();
        assert_eq!(out.status, MpgpStatus::Converged);
        assert!(out.multipliers[0].abs() <= 1e-8);
        assert!((out.multipliers[1] - 2.0).abs() <= 1e-8);
    }

    #[test]
    fn empty_problem_returns_empty() {
        let qp = BoxQP {
            hessian: SparseMatrix::<f64>::zeros(0, 0),
            linear: vec![],
            lower: vec![],
            upper: vec![],
        };
        let out = mpgp_solve(&qp, &[], &settings()).unwrap();
        assert_eq!(out.status, MpgpStatus::Converged);
        assert!(out.multipliers.is_empty());
        assert_eq!(out.hessian_multiplications, 0);
    }

    #[test]
    fn zero_linear_term_uses_absolute_tolerance() {
        let qp = BoxQP {
            hessian: diag(&[1.0, 1.0]),
            linear: vec![0.0, 0.0],
            lower: vec![0.0, 0.0],
            upper: vec![f64::INFINITY; 2],
        };
        let out = mpgp_solve(&qp, &[0.5, 0.5], &settings()).unwrap();
        assert_eq!(out.status, MpgpStatus::Converged);
        assert!(out.projected_gradient_norm < 1e-8);
    }

    #[test]
    fn infeasible_start_is_projected() {
        let qp = BoxQP {
            hessian: diag(&[2.0]),
            linear: vec![-2.0],
            lower: vec![0.0],
            upper: vec![f64::INFINITY],
        };
        let out = mpgp_solve(&qp, &[-5.0], &settings()).unwrap();
        assert_eq!(out.multipliers[0], 0.0);
    }

    #[test]
    fn step_accounting_matches_step_counts() {
        let qp = BoxQP {
            hessian: SparseMatrix::from_triplets(
                3,
                3,
                &[
                    (0, 0, 4.0),
                    (0, 1, 1.0),
                    (1, 0, 1.0),
                    (1, 1, 3.0),
                    (1, 2, 0.5),
                    (2, 1, 0.5),
                    (2, 2, 2.0),
                ],
            ),
            linear: vec![1.0, -2.0, 3.0],
            lower: vec![0.0; 3],
            upper: vec![f64::INFINITY; 3],
        };
        let out = mpgp_solve(&qp, &[0.0; 3], &settings()).unwrap();
        assert_eq!(out.status, MpgpStatus::Converged);
        assert_eq!(
            out.hessian_multiplications,
            1 + out.cg_steps + 2 * out.expansion_steps + out.proportioning_steps
        );
    }

    #[test]
    fn iteration_cap_returns_best_iterate() {
        let qp = BoxQP {
            hessian: diag(&[1.0, 10.0, 100.0]),
            linear: vec![1.0, 1.0, 1.0],
            lower: vec![0.0; 3],
            upper: vec![f64::INFINITY; 3],
        };
        let mut s = settings();
        s.max_hessian_multiplications = Some(2);
        let out = mpgp_solve(&qp, &[0.0; 3], &s).unwrap();
        assert_eq!(out.status, MpgpStatus::HessianMultCap);
        assert!(out.multipliers.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn invalid_bounds_are_rejected() {
        let qp = BoxQP {
            hessian: diag(&[1.0]),
            linear: vec![0.0],
            lower: vec![1.0],
            upper: vec![0.0],
        };
        assert!(matches!(
            mpgp_solve(&qp, &[0.5], &settings()),
            Err(QpError::InvalidBounds { index: 0 })
        ));
    }

    #[test]
    fn trace_file_has_expected_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let qp = BoxQP {
            hessian: diag(&[2.0, 3.0]),
            linear: vec![4.0, -3.0],
            lower: vec![0.0; 2],
            upper: vec![f64::INFINITY; 2],
        };
        let mut s = settings();
        s.trace_path = Some(path.clone());
        mpgp_solve(&qp, &[0.0; 2], &s).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        let mut lines = body.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,step_type,proj_grad_norm,objective"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("0,init,"));
        assert!(body.lines().count() >= 3);
    }

    #[test]
    fn f32_smoke() {
        let h = SparseMatrix::<f32>::from_triplets(2, 2, &[(0, 0, 2.0), (1, 1, 4.0)]);
        let qp = BoxQP {
            hessian: h,
            linear: vec![2.0f32, -4.0],
            lower: vec![0.0; 2],
            upper: vec![f32::INFINITY; 2],
        };
        let mut s = MpgpSettings::<f32>::default();
        s.relative_tolerance = 1e-5;
        let out = mpgp_solve(&qp, &[0.0; 2], &s).unwrap();
        assert!((out.multipliers[0] - 1.0).abs() <= 1e-4);
        assert!(out.multipliers[1].abs() <= 1e-4);
    }
}
