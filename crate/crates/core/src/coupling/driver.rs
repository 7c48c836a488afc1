use super::reduction::Reduction;
use super::{
    CouplingError, FlowSolver, RunReport, SimulationState, SplittingSettings, StepRecord,
    TimeScheme,
};
use crate::assembly::{
    assemble_contact, assemble_coupling, assemble_darcy, assemble_divergence, assemble_elasticity,
    assemble_rhs, assemble_storage, boundary_values, build_dofs, update_fracture_state, DofMap,
    FractureState, HmParameters,
};
use crate::linalg::{
    cg_solve, estimate_spectral_norm, vecops, CgStatus, GeneralFactor, LinearOperator,
    SparseBuilder, SparseMatrix, SpdFactor,
};
use crate::mesh::{BoundaryTag, MixedDimMesh};
use crate::qp::{
    dualize, mpgp_solve, recover_primal, DualQP, InequalityQP, MpgpSettings, MpgpStatus,
    Steplength, POWER_ITERATIONS, POWER_SEED,
};
use crate::Real;

/// One mechanics subproblem solution over the full displacement space.
#[derive(Debug, Clone)]
pub struct MechanicsSolution<T> {
    pub displacement: Vec<T>,
    pub multipliers: Vec<T>,
    /// strictly positive multipliers
    pub active_constraints: usize,
    pub hessian_multiplications: usize,
    pub cg_steps: usize,
    pub expansion_steps: usize,
    pub proportioning_steps: usize,
    /// norm of the reduced load, the natural scale of residual checks
    pub load_norm: T,
}

/// One flow subproblem solution over all pressure and flux unknowns.
#[derive(Debug, Clone)]
pub struct FlowSolution<T> {
    pub pressure: Vec<T>,
    pub flux: Vec<T>,
    /// inner linear solver iterations (1 for the direct solver)
    pub iterations: usize,
    /// norm of the block right side, the natural scale of residual checks
    pub rhs_norm: T,
}

/// Per-time data shared by the subproblem solves: load vectors and boundary
/// values evaluated at the step's end time.
struct StepData<T> {
    time: T,
    mech_rhs: Vec<T>,
    source_rhs: Vec<T>,
    flux_rhs: Vec<T>,
    /// prescribed displacement values, aligned with the fixed-dof list
    displacement_values: Vec<T>,
    /// prescribed flux values, aligned with the fixed-flux list
    flux_values: Vec<T>,
}

/// Driver of one coupled simulation. Owns the degree-of-freedom layout, the
/// time-independent operators, and the factorized dual contact problem; the
/// expensive dualization happens once in [`Simulation::new`] and every time
/// step only refreshes loads, bounds and warm starts.
pub struct Simulation<'a, T: Real> {
    mesh: &'a MixedDimMesh<T>,
    tags: &'a [BoundaryTag<T>],
    params: HmParameters<T>,
    settings: SplittingSettings<T>,
    dofs: DofMap<T>,
    coupling: SparseMatrix<T>,
    storage: SparseMatrix<T>,
    stabilization: SparseMatrix<T>,
    contact_full: SparseMatrix<T>,
    contact_fixed: SparseMatrix<T>,
    contact_bounds: Vec<T>,
    /// stiffness columns of the prescribed displacement dofs, free rows
    stiffness_fixed: SparseMatrix<T>,
    divergence_free: SparseMatrix<T>,
    divergence_fixed: SparseMatrix<T>,
    displacement_map: Reduction,
    flux_map: Reduction,
    dual: DualQP<T>,
    /// MPGP settings with the expansion steplength resolved once
    mpgp: MpgpSettings<T>,
    step: Option<StepData<T>>,
}

impl<'a, T: Real> Simulation<'a, T> {
    pub fn new(
        mesh: &'a MixedDimMesh<T>,
        params: HmParameters<T>,
        tags: &'a [BoundaryTag<T>],
        settings: SplittingSettings<T>,
    ) -> Result<Self, CouplingError> {
        settings.validate()?;
        params.validate()?;
        let dofs = build_dofs(mesh, tags)?;
        let (stiffness, _) = assemble_elasticity(mesh, &dofs, &params)?;
        let coupling = assemble_coupling(mesh, &dofs, &params)?;
        let (storage, stabilization) = assemble_storage(mesh, &dofs, &params)?;
        let divergence = assemble_divergence(mesh, &dofs)?;
        let contact = assemble_contact(mesh, &dofs, &params)?;

        let displacement_map = Reduction::new(
            dofs.n_displacement(),
            dofs.fixed_displacements.iter().map(|f| f.dof).collect(),
        );
        let flux_map = Reduction::new(
            dofs.n_flux(),
            dofs.fixed_fluxes.iter().map(|f| f.dof).collect(),
        );
        let (stiffness_free, stiffness_fixed) = displacement_map.reduce_square(&stiffness);
        let (contact_free, contact_fixed) = displacement_map.split_columns(&contact.matrix);
        let (divergence_free, divergence_fixed) = flux_map.split_columns(&divergence);

        let dual = dualize(InequalityQP {
            hessian: stiffness_free,
            linear: vec![T::zero(); displacement_map.n_free()],
            constraints: contact_free,
            bounds: contact.bounds.clone(),
        })?;
        let mut mpgp = settings.mpgp.clone();
        if let Steplength::Auto = mpgp.expansion_steplength {
            // the dual Hessian never changes, so estimate its norm once
            let norm = estimate_spectral_norm(&dual, POWER_ITERATIONS, POWER_SEED);
            let steplength = if norm.is_zero() {
                T::one()
            } else {
                T::of(1.9) / (T::of(1.1) * norm)
            };
            mpgp.expansion_steplength = Steplength::Fixed(steplength);
            dual.reset_application_count();
        }

        Ok(Simulation {
            mesh,
            tags,
            params,
            settings,
            dofs,
            coupling,
            storage,
            stabilization,
            contact_full: contact.matrix,
            contact_fixed,
            contact_bounds: contact.bounds,
            stiffness_fixed,
            divergence_free,
            divergence_fixed,
            displacement_map,
            flux_map,
            dual,
            mpgp,
            step: None,
        })
    }

    pub fn dofs(&self) -> &DofMap<T> {
        &self.dofs
    }

    pub fn params(&self) -> &HmParameters<T> {
        &self.params
    }

    pub fn settings(&self) -> &SplittingSettings<T> {
        &self.settings
    }

    /// Replaces the per-triangle conductivity override. Only the Darcy block
    /// reads it and that block is reassembled every outer iteration, so the
    /// cached operators and the contact factorization stay valid.
    pub fn set_matrix_conductivity(&mut self, values: Option<Vec<T>>) {
        self.params.conductivity_override = values;
    }

    /// Evaluates loads and boundary values at `time` and refreshes the
    /// constraint bounds. Cached until the time changes.
    fn prepare(&mut self, time: T) -> Result<(), CouplingError> {
        if let Some(step) = &self.step {
            if step.time == time {
                return Ok(());
            }
        }
        let (mech_rhs, source_rhs, flux_rhs) =
            assemble_rhs(self.mesh, &self.dofs, &self.params, self.tags, time)?;
        let values = boundary_values(self.mesh, &self.dofs, self.tags, time)?;
        debug_assert!(values
            .displacement
            .iter()
            .zip(self.displacement_map.fixed())
            .all(|(&(dof, _), &expected)| dof == expected));
        debug_assert!(values
            .flux
            .iter()
            .zip(self.flux_map.fixed())
            .all(|(&(dof, _), &expected)| dof == expected));
        let displacement_values: Vec<T> = values.displacement.iter().map(|&(_, v)| v).collect();
        let flux_values: Vec<T> = values.flux.iter().map(|&(_, v)| v).collect();

        // prescribed displacements shift the constraint right side
        let mut bounds = self.contact_bounds.clone();
        let shift = self.contact_fixed.multiply(&displacement_values)?;
        for (b, s) in bounds.iter_mut().zip(&shift) {
            *b -= *s;
        }
        self.dual.set_constraint_bounds(bounds)?;

        self.step = Some(StepData {
            time,
            mech_rhs,
            source_rhs,
            flux_rhs,
            displacement_values,
            flux_values,
        });
        Ok(())
    }

    /// Solves the contact mechanics subproblem at `time` with the given
    /// pressure iterate. `warm_start` multipliers must match the constraint
    /// count; None starts from zero.
    pub fn solve_mechanics(
        &mut self,
        time: T,
        pressure: &[T],
        warm_start: Option<&[T]>,
    ) -> Result<MechanicsSolution<T>, CouplingError> {
        self.prepare(time)?;
        let step = self.step.as_ref().expect("prepared");
        let mut load = step.mech_rhs.clone();
        let lifted = self.coupling.multiply_transpose(pressure)?;
        vecops::axpy(self.params.head_scale, &lifted, &mut load);
        let mut reduced = self.displacement_map.gather(&load);
        let shift = self.stiffness_fixed.multiply(&step.displacement_values)?;
        for (r, s) in reduced.iter_mut().zip(&shift) {
            *r -= *s;
        }
        let load_norm = vecops::norm2(&reduced);
        self.dual.set_primal_linear(reduced)?;

        let start = match warm_start {
            Some(multipliers) => multipliers.to_vec(),
            None => vec![T::zero(); self.dual.dual_dim()],
        };
        let result = mpgp_solve(&self.dual.box_qp(), &start, &self.mpgp)?;
        if result.status == MpgpStatus::HessianMultCap {
            return Err(CouplingError::MechanicsStalled {
                multiplications: result.hessian_multiplications,
                gradient_norm: result.projected_gradient_norm.to_f64().unwrap_or(f64::NAN),
            });
        }
        let free = recover_primal(&self.dual, &result.multipliers)?;
        let step = self.step.as_ref().expect("prepared");
        let displacement = self
            .displacement_map
            .scatter(&free, &step.displacement_values);
        let active_constraints = result
            .multipliers
            .iter()
            .filter(|&&m| m > T::zero())
            .count();
        Ok(MechanicsSolution {
            displacement,
            multipliers: result.multipliers,
            active_constraints,
            hessian_multiplications: result.hessian_multiplications,
            cg_steps: result.cg_steps,
            expansion_steps: result.expansion_steps,
            proportioning_steps: result.proportioning_steps,
            load_norm,
        })
    }

    /// Solves the transient flow block system at `time` for one implicit
    /// Euler step of size `dt`, with the current displacement iterate and the
    /// previous time level's displacement and pressure.
    #[allow(clippy::too_many_arguments)]
    pub fn solve_flow(
        &mut self,
        time: T,
        dt: T,
        displacement: &[T],
        previous_displacement: &[T],
        previous_pressure: &[T],
        iterate_pressure: &[T],
        fracture: &FractureState<T>,
    ) -> Result<FlowSolution<T>, CouplingError> {
        self.prepare(time)?;
        let transient = Transient {
            dt,
            displacement,
            previous_displacement,
            previous_pressure,
            iterate_pressure,
        };
        self.flow_system(Some(transient), fracture)
    }

    /// Solves the steady flow problem (storage terms dropped) used for the
    /// initial condition.
    pub fn solve_flow_steady(
        &mut self,
        time: T,
        fracture: &FractureState<T>,
    ) -> Result<FlowSolution<T>, CouplingError> {
        self.prepare(time)?;
        self.flow_system(None, fracture)
    }

    fn flow_system(
        &self,
        transient: Option<Transient<'_, T>>,
        fracture: &FractureState<T>,
    ) -> Result<FlowSolution<T>, CouplingError> {
        let step = self.step.as_ref().expect("prepared");
        let n_pressure = self.dofs.n_pressure();
        let darcy = assemble_darcy(self.mesh, &self.dofs, &self.params, fracture)?;
        let (darcy_free, darcy_fixed) = self.flux_map.reduce_square(&darcy);
        let dt = transient.as_ref().map_or(T::one(), |t| t.dt);

        // mass balance rows
        let mut balance_rhs = match &transient {
            Some(t) => {
                let mut rhs: Vec<T> = step.source_rhs.iter().map(|&f| dt * f).collect();
                vecops::axpy(T::one(), &self.storage.multiply(t.previous_pressure)?, &mut rhs);
                vecops::axpy(
                    T::one(),
                    &self.stabilization.multiply(t.iterate_pressure)?,
                    &mut rhs,
                );
                let mut moved = t.displacement.to_vec();
                vecops::axpy(-T::one(), t.previous_displacement, &mut moved);
                vecops::axpy(-T::one(), &self.coupling.multiply(&moved)?, &mut rhs);
                rhs
            }
            None => step.source_rhs.clone(),
        };
        let prescribed_flow = self.divergence_fixed.multiply(&step.flux_values)?;
        vecops::axpy(-dt, &prescribed_flow, &mut balance_rhs);

        // flux rows, prescribed unknowns eliminated
        let mut flux_rhs = self.flux_map.gather(&step.flux_rhs);
        vecops::axpy(
            -T::one(),
            &darcy_fixed.multiply(&step.flux_values)?,
            &mut flux_rhs,
        );

        let rhs_norm =
            (vecops::dot(&balance_rhs, &balance_rhs) + vecops::dot(&flux_rhs, &flux_rhs)).sqrt();

        let (pressure, flux_free, iterations) = match self.settings.flow_solver {
            FlowSolver::Direct => {
                let n = n_pressure + self.flux_map.n_free();
                let mut builder = SparseBuilder::new(n, n);
                if transient.is_some() {
                    for (i, j, value) in self.storage.iter() {
                        builder.add(i, j, value);
                    }
                    for (i, j, value) in self.stabilization.iter() {
                        builder.add(i, j, value);
                    }
                }
                for (i, j, value) in self.divergence_free.iter() {
                    builder.add(i, n_pressure + j, dt * value);
                    builder.add(n_pressure + j, i, -value);
                }
                for (i, j, value) in darcy_free.iter() {
                    builder.add(n_pressure + i, n_pressure + j, value);
                }
                let factor = GeneralFactor::new(&builder.build())?;
                let mut rhs = balance_rhs;
                rhs.extend_from_slice(&flux_rhs);
                let solution = factor.solve(&rhs)?;
                let flux_free = solution[n_pressure..].to_vec();
                let mut pressure = solution;
                pressure.truncate(n_pressure);
                (pressure, flux_free, 1)
            }
            FlowSolver::SchurCg => {
                let factor = SpdFactor::new(&darcy_free)?;
                let operator = SchurOperator {
                    mass: transient
                        .as_ref()
                        .map(|_| (&self.storage, &self.stabilization)),
                    divergence: &self.divergence_free,
                    darcy: &factor,
                    dt,
                };
                let mut lifted = flux_rhs.clone();
                factor.solve_in_place(&mut lifted);
                let mut schur_rhs = balance_rhs;
                vecops::axpy(-dt, &self.divergence_free.multiply(&lifted)?, &mut schur_rhs);
                let start = match &transient {
                    Some(t) => t.iterate_pressure.to_vec(),
                    None => vec![T::zero(); n_pressure],
                };
                let cap = 40 * n_pressure + 100;
                let outcome = cg_solve(&operator, &schur_rhs, &start, T::of(1e-12), cap);
                if outcome.status != CgStatus::Converged {
                    return Err(CouplingError::FlowStalled {
                        iterations: outcome.iterations,
                    });
                }
                let pressure = outcome.solution;
                let mut flux_free = self.divergence_free.multiply_transpose(&pressure)?;
                vecops::axpy(T::one(), &flux_rhs, &mut flux_free);
                factor.solve_in_place(&mut flux_free);
                (pressure, flux_free, outcome.iterations)
            }
        };

        let flux = self.flux_map.scatter(&flux_free, &step.flux_values);
        Ok(FlowSolution {
            pressure,
            flux,
            iterations,
            rhs_norm,
        })
    }

    /// c − B·u per constraint row; nonnegative within solver tolerance when
    /// `u` comes from a mechanics solve.
    pub fn contact_slack(&self, displacement: &[T]) -> Result<Vec<T>, CouplingError> {
        let mut slack = self.contact_full.multiply(displacement)?;
        for (s, &c) in slack.iter_mut().zip(&self.contact_bounds) {
            *s = c - *s;
        }
        Ok(slack)
    }

    /// Advances the state to `time` with one implicit Euler step of size
    /// `dt`, iterating the fixed-stress split until the relative increments
    /// of displacement and pressure drop below the tolerance, or until the
    /// lagged coupling terms are consistent, or the iteration cap.
    pub fn fixed_stress_step(
        &mut self,
        state: &mut SimulationState<T>,
        time: T,
        dt: T,
    ) -> Result<StepRecord<T>, CouplingError> {
        if !(dt > T::zero()) {
            return Err(CouplingError::InvalidScheme(format!(
                "step size must be positive, got {dt}"
            )));
        }
        self.prepare(time)?;
        let previous_displacement = state.displacement.clone();
        let previous_pressure = state.pressure.clone();
        let mut displacement = state.displacement.clone();
        let mut pressure = state.pressure.clone();
        let mut flux = state.flux.clone();
        let mut multipliers = state.multipliers.clone();
        let mut fracture = state.fracture.clone();
        let mut record = StepRecord {
            step: state.step + 1,
            time,
            outer_iterations: 0,
            converged: false,
            flow_iterations: 0,
            hessian_multiplications: 0,
            cg_steps: 0,
            expansion_steps: 0,
            proportioning_steps: 0,
            active_constraints: 0,
            max_contact_violation: T::zero(),
            displacement_increments: Vec::new(),
            pressure_increments: Vec::new(),
        };
        let tolerance = self.settings.tolerance;

        for _ in 0..self.settings.max_outer_iterations {
            let warm = self
                .settings
                .warm_start
                .then_some(multipliers.as_slice());
            let mechanics = self.solve_mechanics(time, &pressure, warm)?;
            fracture =
                update_fracture_state(self.mesh, &self.dofs, &self.params, &mechanics.displacement)?;
            let flow = self.solve_flow(
                time,
                dt,
                &mechanics.displacement,
                &previous_displacement,
                &previous_pressure,
                &pressure,
                &fracture,
            )?;

            let displacement_increment = vecops::rel_diff(&mechanics.displacement, &displacement);
            let pressure_increment = vecops::rel_diff(&flow.pressure, &pressure);
            // residual of the lagged coupling terms: when it vanishes the
            // split pair already solves the monolithic step
            let mut pressure_delta = flow.pressure.clone();
            vecops::axpy(-T::one(), &pressure, &mut pressure_delta);
            let feedback_mech = self.params.head_scale
                * vecops::norm2(&self.coupling.multiply_transpose(&pressure_delta)?);
            let feedback_flow = vecops::norm2(&self.stabilization.multiply(&pressure_delta)?);
            let mech_scale = mechanics.load_norm.max(T::one());
            let flow_scale = flow.rhs_norm.max(T::one());

            displacement = mechanics.displacement;
            multipliers = mechanics.multipliers;
            pressure = flow.pressure;
            flux = flow.flux;
            record.outer_iterations += 1;
            record.flow_iterations += flow.iterations;
            record.hessian_multiplications += mechanics.hessian_multiplications;
            record.cg_steps += mechanics.cg_steps;
            record.expansion_steps += mechanics.expansion_steps;
            record.proportioning_steps += mechanics.proportioning_steps;
            record.active_constraints = mechanics.active_constraints;
            record.displacement_increments.push(displacement_increment);
            record.pressure_increments.push(pressure_increment);

            let settled = displacement_increment <= tolerance && pressure_increment <= tolerance;
            let consistent = feedback_mech <= tolerance * mech_scale
                && feedback_flow <= tolerance * flow_scale;
            if settled || consistent {
                record.converged = true;
                break;
            }
        }

        let slack = self.contact_slack(&displacement)?;
        record.max_contact_violation = slack
            .iter()
            .fold(T::zero(), |worst, &s| worst.max(-s));

        state.step += 1;
        state.time = time;
        state.displacement = displacement;
        state.pressure = pressure;
        state.flux = flux;
        state.multipliers = multipliers;
        state.fracture = fracture;
        state.last_report = Some(record.clone());
        Ok(record)
    }

    /// The state at t = 0: pressure from a steady flow solve at the resting
    /// aperture, displacement and multipliers from one contact solve under
    /// that pressure.
    pub fn initial_state(&mut self) -> Result<SimulationState<T>, CouplingError> {
        let resting = FractureState::resting(self.mesh, &self.params.fracture);
        let flow = self.solve_flow_steady(T::zero(), &resting)?;
        let mechanics = self.solve_mechanics(T::zero(), &flow.pressure, None)?;
        let fracture =
            update_fracture_state(self.mesh, &self.dofs, &self.params, &mechanics.displacement)?;
        Ok(SimulationState {
            step: 0,
            time: T::zero(),
            displacement: mechanics.displacement,
            pressure: flow.pressure,
            flux: flow.flux,
            multipliers: mechanics.multipliers,
            fracture,
            last_report: None,
        })
    }

    /// Runs the whole time scheme from the initial state. The observer sees
    /// every state including the initial one, so partial trajectories survive
    /// a failing step.
    pub fn run_simulation(
        &mut self,
        scheme: &TimeScheme<T>,
        observer: impl FnMut(&SimulationState<T>),
    ) -> Result<(SimulationState<T>, RunReport<T>), CouplingError> {
        self.run_simulation_with(scheme, |_, _| Ok(()), observer)
    }

    /// Like [`run_simulation`](Self::run_simulation) with a hook called
    /// before each step; scenarios use it to update time-dependent fields
    /// such as the excavation-zone conductivity.
    pub fn run_simulation_with(
        &mut self,
        scheme: &TimeScheme<T>,
        mut before_step: impl FnMut(&mut Self, T) -> Result<(), CouplingError>,
        mut observer: impl FnMut(&SimulationState<T>),
    ) -> Result<(SimulationState<T>, RunReport<T>), CouplingError> {
        let mut state = self.initial_state()?;
        observer(&state);
        let mut report = RunReport::default();
        for (time, dt) in scheme.steps() {
            before_step(self, time)?;
            let record = self.fixed_stress_step(&mut state, time, dt)?;
            report.absorb(record);
            observer(&state);
        }
        Ok((state, report))
    }
}

struct Transient<'v, T> {
    dt: T,
    displacement: &'v [T],
    previous_displacement: &'v [T],
    previous_pressure: &'v [T],
    iterate_pressure: &'v [T],
}

/// Pressure Schur complement (C + C_β) + Δt·D E⁻¹ Dᵀ applied implicitly.
struct SchurOperator<'s, T: Real> {
    mass: Option<(&'s SparseMatrix<T>, &'s SparseMatrix<T>)>,
    divergence: &'s SparseMatrix<T>,
    darcy: &'s SpdFactor<T>,
    dt: T,
}

impl<T: Real> LinearOperator<T> for SchurOperator<'_, T> {
    fn dim(&self) -> usize {
        self.divergence.n_rows()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let mut lifted = self
            .divergence
            .multiply_transpose(x)
            .expect("dimensions fixed at construction");
        self.darcy.solve_in_place(&mut lifted);
        self.divergence.multiply_into(&lifted, y);
        for value in y.iter_mut() {
            *value *= self.dt;
        }
        if let Some((storage, stabilization)) = self.mass {
            vecops::axpy(T::one(), &storage.multiply(x).expect("square"), y);
            vecops::axpy(T::one(), &stabilization.multiply(x).expect("square"), y);
        }
    }
}
