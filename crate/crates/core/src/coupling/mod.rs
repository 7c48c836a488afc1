//! Time stepping and the fixed-stress splitting loop.
//!
//! Each implicit Euler step alternates two subproblems until the iterates
//! settle: a contact-constrained mechanics solve with the pressure lagged,
//! and a linear pressure–flux saddle solve with the displacement frozen. The
//! elasticity operator, the constraint geometry and therefore the factorized
//! dual contact problem never change, so [`Simulation`] dualizes once and
//! every mechanics solve reduces to refreshing the load and running MPGP
//! from the previous multipliers.

mod driver;
mod reduction;

pub use driver::{FlowSolution, MechanicsSolution, Simulation};

use crate::assembly::{AssemblyError, FractureState};
use crate::linalg::LinalgError;
use crate::qp::{MpgpSettings, QpError};
use crate::Real;

#[derive(Debug, thiserror::Error)]
pub enum CouplingError {
    #[error("invalid splitting settings: {0}")]
    InvalidSettings(String),
    #[error("invalid time scheme: {0}")]
    InvalidScheme(String),
    #[error(
        "mechanics solve hit the Hessian multiplication cap ({multiplications} applications, \
         projected gradient {gradient_norm:e})"
    )]
    MechanicsStalled {
        multiplications: usize,
        gradient_norm: f64,
    },
    #[error("flow solve did not converge within {iterations} conjugate gradient iterations")]
    FlowStalled { iterations: usize },
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// How the pressure–flux block system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowSolver {
    /// one sparse LU factorization of the full block matrix per solve
    Direct,
    /// Cholesky of the Darcy block and conjugate gradients on the pressure
    /// Schur complement, warm started from the previous pressure iterate
    SchurCg,
}

/// Knobs of the outer fixed-stress iteration.
#[derive(Debug, Clone)]
pub struct SplittingSettings<T> {
    /// cap on outer iterations per time step; reaching it is recorded in the
    /// step report, not fatal
    pub max_outer_iterations: usize,
    /// relative increment of displacement and pressure below which the step
    /// counts as converged
    pub tolerance: T,
    pub flow_solver: FlowSolver,
    pub mpgp: MpgpSettings<T>,
    /// start each mechanics solve from the previous multipliers
    pub warm_start: bool,
}

impl<T: Real> Default for SplittingSettings<T> {
    fn default() -> Self {
        SplittingSettings {
            max_outer_iterations: 30,
            tolerance: T::of(1e-8),
            flow_solver: FlowSolver::Direct,
            mpgp: MpgpSettings::default(),
            warm_start: true,
        }
    }
}

impl<T: Real> SplittingSettings<T> {
    pub fn validate(&self) -> Result<(), CouplingError> {
        if self.max_outer_iterations == 0 {
            return Err(CouplingError::InvalidSettings(
                "at least one outer iteration is needed".into(),
            ));
        }
        if !(self.tolerance > T::zero()) {
            return Err(CouplingError::InvalidSettings(
                "tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Piecewise-constant step sizes: a list of (interval end, Δt) pairs covering
/// (0, T]. Every interval length must be an integer multiple of its Δt.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScheme<T> {
    intervals: Vec<(T, T)>,
}

impl<T: Real> TimeScheme<T> {
    pub fn new(intervals: Vec<(T, T)>) -> Result<Self, CouplingError> {
        if intervals.is_empty() {
            return Err(CouplingError::InvalidScheme(
                "at least one interval is required".into(),
            ));
        }
        let mut start = T::zero();
        for &(end, dt) in &intervals {
            if !(end > start) {
                return Err(CouplingError::InvalidScheme(format!(
                    "interval ends must increase strictly, got {end} after {start}"
                )));
            }
            if !(dt > T::zero()) {
                return Err(CouplingError::InvalidScheme(format!(
                    "step size must be positive, got {dt}"
                )));
            }
            let length = end - start;
            let count = (length / dt).round();
            if count < T::one() || (count * dt - length).abs() > T::of(1e-9) * length {
                return Err(CouplingError::InvalidScheme(format!(
                    "step size {dt} does not divide the interval ({start}, {end}]"
                )));
            }
            start = end;
        }
        Ok(TimeScheme { intervals })
    }

    /// A single uniform interval (0, end].
    pub fn uniform(end: T, dt: T) -> Result<Self, CouplingError> {
        TimeScheme::new(vec![(end, dt)])
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn end_time(&self) -> T {
        self.intervals.last().expect("validated nonempty").0
    }

    /// The step targets as (time, Δt) pairs; the last step of each interval
    /// lands exactly on the interval end.
    pub fn steps(&self) -> Vec<(T, T)> {
        let mut out = Vec::new();
        let mut start = T::zero();
        for &(end, dt) in &self.intervals {
            let count = ((end - start) / dt)
                .round()
                .to_usize()
                .expect("validated count");
            let mut previous = start;
            for k in 1..=count {
                let t = if k == count {
                    end
                } else {
                    start + dt * T::of(k as f64)
                };
                out.push((t, t - previous));
                previous = t;
            }
            start = end;
        }
        out
    }

    pub fn n_steps(&self) -> usize {
        self.steps().len()
    }
}

/// Solver effort and outcome of one time step.
#[derive(Debug, Clone)]
pub struct StepRecord<T> {
    pub step: usize,
    pub time: T,
    pub outer_iterations: usize,
    /// false when the iteration cap was reached before the tolerance
    pub converged: bool,
    pub flow_iterations: usize,
    pub hessian_multiplications: usize,
    pub cg_steps: usize,
    pub expansion_steps: usize,
    pub proportioning_steps: usize,
    /// positive multipliers after the final mechanics solve
    pub active_constraints: usize,
    /// max over constraint rows of B·u − c after the step
    pub max_contact_violation: T,
    /// relative displacement increment per outer iteration
    pub displacement_increments: Vec<T>,
    /// relative pressure increment per outer iteration
    pub pressure_increments: Vec<T>,
}

impl<T: Real> StepRecord<T> {
    pub const CSV_HEADER: &'static str =
        "time,outer_iterations,flow_iterations,mpgp_hessian_mults,active_constraints";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{},{},{},{}",
            self.time,
            self.outer_iterations,
            self.flow_iterations,
            self.hessian_multiplications,
            self.active_constraints
        )
    }
}

/// Accumulated per-step records plus cumulative counters.
#[derive(Debug, Clone)]
pub struct RunReport<T> {
    pub steps: Vec<StepRecord<T>>,
    pub total_outer_iterations: usize,
    pub total_flow_iterations: usize,
    pub total_hessian_multiplications: usize,
}

impl<T> Default for RunReport<T> {
    fn default() -> Self {
        RunReport {
            steps: Vec::new(),
            total_outer_iterations: 0,
            total_flow_iterations: 0,
            total_hessian_multiplications: 0,
        }
    }
}

impl<T: Real> RunReport<T> {
    pub fn absorb(&mut self, record: StepRecord<T>) {
        self.total_outer_iterations += record.outer_iterations;
        self.total_flow_iterations += record.flow_iterations;
        self.total_hessian_multiplications += record.hessian_multiplications;
        self.steps.push(record);
    }
}

/// Full solver state at one time level.
#[derive(Debug, Clone)]
pub struct SimulationState<T> {
    pub step: usize,
    pub time: T,
    /// every displacement unknown, prescribed entries holding their boundary
    /// values
    pub displacement: Vec<T>,
    pub pressure: Vec<T>,
    /// every flux unknown, prescribed entries holding their boundary values
    pub flux: Vec<T>,
    /// contact multipliers, the warm start of the next mechanics solve
    pub multipliers: Vec<T>,
    pub fracture: FractureState<T>,
    /// report of the step that produced this state; None for the initial one
    pub last_report: Option<StepRecord<T>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_enumerates_interval_steps() {
        let scheme = TimeScheme::new(vec![(1.0, 0.25), (2.0, 0.5)]).unwrap();
        let steps = scheme.steps();
        let times: Vec<f64> = steps.iter().map(|&(t, _)| t).collect();
        assert_eq!(times, vec![0.25, 0.5, 0.75, 1.0, 1.5, 2.0]);
        assert!(steps.iter().all(|&(_, dt)| dt == 0.25 || dt == 0.5));
        assert_eq!(scheme.n_steps(), 6);
        assert_eq!(scheme.end_time(), 2.0);
    }

    #[test]
    fn scheme_rejects_bad_intervals() {
        assert!(TimeScheme::<f64>::new(vec![]).is_err());
        assert!(TimeScheme::new(vec![(1.0, 0.5), (1.0, 0.5)]).is_err());
        assert!(TimeScheme::new(vec![(1.0, -0.5)]).is_err());
        assert!(TimeScheme::new(vec![(1.0, 0.3)]).is_err());
        assert!(TimeScheme::new(vec![(1.0, 2.0)]).is_err());
    }

    #[test]
    fn uneven_interval_boundaries_land_exactly() {
        let scheme = TimeScheme::new(vec![(0.3, 0.1), (0.7, 0.2)]).unwrap();
        let steps = scheme.steps();
        assert_eq!(steps.len(), 5);
        assert_eq!(steps[2].0, 0.3);
        assert_eq!(steps[4].0, 0.7);
        let total: f64 = steps.iter().map(|&(_, dt)| dt).sum();
        assert!((total - 0.7).abs() <= 1e-12);
    }

    #[test]
    fn settings_validation_catches_nonsense() {
        let mut s = SplittingSettings::<f64>::default();
        s.validate().unwrap();
        s.max_outer_iterations = 0;
        assert!(s.validate().is_err());
        s = SplittingSettings::default();
        s.tolerance = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn csv_row_matches_the_frozen_header() {
        let record = StepRecord {
            step: 3,
            time: 86400.0,
            outer_iterations: 2,
            converged: true,
            flow_iterations: 2,
            hessian_multiplications: 17,
            cg_steps: 9,
            expansion_steps: 3,
            proportioning_steps: 2,
            active_constraints: 4,
            max_contact_violation: 0.0,
            displacement_increments: vec![],
            pressure_increments: vec![],
        };
        assert_eq!(
            StepRecord::<f64>::CSV_HEADER.split(',').count(),
            record.csv_row().split(',').count()
        );
        assert_eq!(record.csv_row(), "8.64e4,2,2,17,4");
    }
}
