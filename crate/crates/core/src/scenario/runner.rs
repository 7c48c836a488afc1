//! Resolution of a parsed configuration into runnable objects and the file
//! outputs of a scenario run.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::assembly::{build_dofs, DofMap, HmParameters};
use crate::coupling::{
    CouplingError, RunReport, Simulation, SimulationState, SplittingSettings, StepRecord,
    TimeScheme,
};
use crate::mesh::{BoundaryTag, MixedDimMesh};
use crate::Real;

use super::config::ScenarioConfig;
use super::excavation::ExcavationModel;
use super::observe::{ObservationPoint, ObservationRecord};
use super::{vtk, ScenarioError};

/// A fully resolved scenario: mesh, materials, schedule and instrumentation,
/// ready to hand to the coupled solver.
pub struct ScenarioSetup<T: Real> {
    pub name: String,
    pub mesh: MixedDimMesh<T>,
    pub tags: Vec<BoundaryTag<T>>,
    pub params: HmParameters<T>,
    pub settings: SplittingSettings<T>,
    pub scheme: TimeScheme<T>,
    pub excavation: Option<ExcavationModel<T>>,
    pub observations: Vec<ObservationPoint<T>>,
    /// snapshot times in seconds, sorted, each landing on a step target
    pub field_times: Vec<T>,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Resolves the configuration against the mesh it describes. All
    /// remaining cross-checks happen here: tag coverage in both directions,
    /// observation points inside the domain, the excavation finishing within
    /// the schedule, snapshot times landing on steps.
    pub fn build<T: Real>(&self) -> Result<ScenarioSetup<T>, ScenarioError> {
        let mesh = self.build_mesh::<T>()?;
        let tags = self.boundary_tags::<T>();
        for name in &mesh.tag_names {
            if !tags.iter().any(|t| &t.name == name) {
                return Err(ScenarioError::Config(format!(
                    "boundary tag `{name}` appears in the mesh but has no definition"
                )));
            }
        }
        for tag in &tags {
            if !mesh.tag_names.contains(&tag.name) {
                return Err(ScenarioError::Config(format!(
                    "boundary tag `{}` matches no facet of the mesh",
                    tag.name
                )));
            }
        }
        let params = self.parameters::<T>();
        params.validate()?;
        let settings = self.splitting_settings::<T>()?;
        let scheme = self.time_scheme::<T>()?;
        let excavation = self.excavation_model::<T>();
        if let Some(model) = &excavation {
            model.validate()?;
            let finish = model.length / model.front_speed;
            if finish > scheme.end_time() * (T::one() + T::of(1e-9)) {
                return Err(ScenarioError::Config(format!(
                    "excavation: the front needs {finish} s to cover the full length but the \
                     schedule ends at {} s",
                    scheme.end_time()
                )));
            }
        }
        let observations = self
            .observation
            .iter()
            .map(|p| ObservationPoint::locate(&p.id, p.position.map(T::of), &mesh))
            .collect::<Result<Vec<_>, _>>()?;

        let targets = scheme.steps();
        let tolerance = scheme.end_time() * T::of(1e-9);
        let mut field_times = self.field_times::<T>();
        field_times.sort_by(|a, b| a.partial_cmp(b).expect("snapshot times are finite"));
        field_times.dedup();
        for &t in &field_times {
            let on_step = t == T::zero()
                || targets.iter().any(|&(target, _)| (t - target).abs() <= tolerance);
            if !on_step {
                return Err(ScenarioError::Config(format!(
                    "output.fields_at: {} is not a time-step target",
                    t / T::of(self.time.unit.seconds())
                )));
            }
        }

        Ok(ScenarioSetup {
            name: self.name.clone(),
            mesh,
            tags,
            params,
            settings,
            scheme,
            excavation,
            observations,
            field_times,
            seed: self.seed,
        })
    }
}

impl<T: Real> ScenarioSetup<T> {
    pub fn simulation(&self) -> Result<Simulation<'_, T>, CouplingError> {
        Simulation::new(&self.mesh, self.params.clone(), &self.tags, self.settings.clone())
    }

    /// The unknown layout, for interpreting states outside the solver.
    pub fn dofs(&self) -> Result<DofMap<T>, ScenarioError> {
        Ok(build_dofs(&self.mesh, &self.tags)?)
    }

    /// Runs the whole schedule, refreshing the excavation-zone conductivity
    /// before each step. The observer sees the initial state and every step.
    pub fn run(
        &self,
        observer: impl FnMut(&SimulationState<T>),
    ) -> Result<(SimulationState<T>, RunReport<T>), CouplingError> {
        let mut simulation = self.simulation()?;
        simulation.run_simulation_with(
            &self.scheme,
            |sim, time| {
                if let Some(model) = &self.excavation {
                    sim.set_matrix_conductivity(Some(model.field(&self.mesh, time)));
                }
                Ok(())
            },
            observer,
        )
    }
}

/// Everything a finished run produced, with the output paths for reporting.
pub struct RunSummary {
    pub final_state: SimulationState<f64>,
    pub report: RunReport<f64>,
    pub observations: Vec<ObservationRecord<f64>>,
    pub files: Vec<PathBuf>,
}

/// Runs a scenario and writes its outputs under `out_dir`: the resolved
/// configuration, per-step solver statistics, observation-point series and
/// VTK snapshots at the configured times. On solver failure the files written
/// so far are kept, truncated at the last completed step.
pub fn run_scenario(
    config: &ScenarioConfig,
    out_dir: &Path,
    trace_qp: bool,
) -> Result<RunSummary, ScenarioError> {
    let mut setup = config.build::<f64>()?;
    fs::create_dir_all(out_dir)?;
    if trace_qp {
        setup.settings.mpgp.trace_path = Some(out_dir.join("qp_trace.csv"));
    }
    let dofs = setup.dofs()?;

    let mut files = vec![out_dir.join("resolved.toml")];
    fs::write(&files[0], config.to_toml()?)?;

    let steps_path = out_dir.join("steps.csv");
    let mut steps_csv = BufWriter::new(fs::File::create(&steps_path)?);
    writeln!(steps_csv, "{}", StepRecord::<f64>::CSV_HEADER)?;
    files.push(steps_path);

    let observations_path = out_dir.join("observations.csv");
    let mut observations_csv = BufWriter::new(fs::File::create(&observations_path)?);
    writeln!(observations_csv, "{}", ObservationRecord::<f64>::CSV_HEADER)?;
    files.push(observations_path);

    let snapshot_tolerance = setup.scheme.end_time() * 1e-9;
    let mut observations = Vec::new();
    let mut output_error: Option<ScenarioError> = None;
    let mut snapshot_files = Vec::new();

    let outcome = setup.run(|state| {
        if output_error.is_some() {
            return;
        }
        let mut write_state = || -> Result<(), ScenarioError> {
            if let Some(record) = &state.last_report {
                writeln!(steps_csv, "{}", record.csv_row())?;
            }
            for point in &setup.observations {
                let record = point.record(&setup.mesh, &dofs, state);
                writeln!(observations_csv, "{}", record.csv_row())?;
                observations.push(record);
            }
            let snapshot = setup
                .field_times
                .iter()
                .position(|&t| (t - state.time).abs() <= snapshot_tolerance);
            if let Some(index) = snapshot {
                let path = out_dir.join(format!("fields_{index:03}.vtk"));
                // show the conductivity the step actually ran with
                let mut params = setup.params.clone();
                if let Some(model) = &setup.excavation {
                    params.conductivity_override = Some(model.field(&setup.mesh, state.time));
                }
                vtk::write_fields(&setup.mesh, &dofs, &params, state, &path)?;
                snapshot_files.push(path);
            }
            Ok(())
        };
        output_error = write_state().err();
    });

    steps_csv.flush()?;
    observations_csv.flush()?;
    files.extend(snapshot_files);
    if let Some(error) = output_error {
        return Err(error);
    }
    let (final_state, report) = outcome?;
    Ok(RunSummary { final_state, report, observations, files })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load_config;

    #[test]
    fn builtin_scenarios_resolve_end_to_end() {
        for name in ["terzaghi", "single_fracture", "excavation2d"] {
            let setup = load_config(name).unwrap().build::<f64>().unwrap();
            assert_eq!(setup.name, name);
            setup.dofs().expect("unknown layout resolves");
            for &t in &setup.field_times {
                assert!(t >= 0.0 && t <= setup.scheme.end_time());
            }
        }
    }

    #[test]
    fn tag_cover_is_checked_in_both_directions() {
        let mut config = load_config("single_fracture").unwrap();
        config.boundaries[0].name = "misspelled".into();
        let err = config.build::<f64>().unwrap_err();
        assert!(err.to_string().contains("has no definition"), "{err}");

        let mut config = load_config("single_fracture").unwrap();
        config.boundaries.push(crate::scenario::BoundarySection {
            name: "ghost".into(),
            flow: config.boundaries[0].flow,
            mech: config.boundaries[0].mech,
        });
        let err = config.build::<f64>().unwrap_err();
        assert!(err.to_string().contains("matches no facet"), "{err}");
    }

    #[test]
    fn snapshot_times_must_land_on_steps() {
        let mut config = load_config("single_fracture").unwrap();
        config.output.fields_at = vec![0.333];
        let err = config.build::<f64>().unwrap_err();
        assert!(err.to_string().contains("0.333"), "{err}");
        config.output.fields_at = vec![0.0, 0.35, 1.0];
        config.build::<f64>().unwrap();
    }

    #[test]
    fn excavation_must_fit_the_schedule() {
        let mut config = load_config("excavation2d").unwrap();
        config.excavation.as_mut().unwrap().front_speed = 0.01;
        let err = config.build::<f64>().unwrap_err();
        assert!(err.to_string().contains("schedule ends"), "{err}");
    }

    #[test]
    fn runs_write_deterministic_outputs() {
        let config = load_config("single_fracture").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        let summary = run_scenario(&config, &a, false).unwrap();
        run_scenario(&config, &b, false).unwrap();

        let n_steps = config.time_scheme::<f64>().unwrap().n_steps();
        assert_eq!(summary.report.steps.len(), n_steps);
        assert_eq!(
            summary.observations.len(),
            (n_steps + 1) * config.observation.len()
        );
        assert!(summary.final_state.time > 0.0);
        for file in &summary.files {
            assert!(file.exists(), "{} exists", file.display());
            let relative = file.strip_prefix(&a).unwrap();
            let twin = b.join(relative);
            assert_eq!(
                fs::read(file).unwrap(),
                fs::read(&twin).unwrap(),
                "{} is reproducible",
                relative.display()
            );
        }
        let names: Vec<_> = summary
            .files
            .iter()
            .map(|f| f.file_name().unwrap().to_str().unwrap().to_string())
            .collect();
        assert!(names.contains(&"resolved.toml".to_string()));
        assert!(names.contains(&"steps.csv".to_string()));
        assert!(names.contains(&"observations.csv".to_string()));
        assert!(names.iter().any(|n| n.starts_with("fields_") && n.ends_with(".vtk")));

        let steps = fs::read_to_string(a.join("steps.csv")).unwrap();
        assert_eq!(steps.lines().next().unwrap(), StepRecord::<f64>::CSV_HEADER);
        assert_eq!(steps.lines().count(), n_steps + 1);
    }

    #[test]
    fn qp_trace_lands_in_the_output_directory() {
        let config = load_config("single_fracture").unwrap();
        let dir = tempfile::tempdir().unwrap();
        run_scenario(&config, dir.path(), true).unwrap();
        let trace = fs::read_to_string(dir.path().join("qp_trace.csv")).unwrap();
        assert!(trace.lines().count() > 1, "trace has iteration rows");
    }
}
