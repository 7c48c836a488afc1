//! Configuration-driven scenarios: parsing, built-in problem setups, the
//! excavation conductivity model, observation probes and field output.
//!
//! A scenario is described by a TOML file with sections for the mesh (loaded
//! from a file or generated), materials, boundary tags, the time scheme, the
//! splitting settings, and optional excavation, observation and output
//! sections. [`ScenarioConfig`] is the parsed form; [`ScenarioConfig::build`]
//! resolves it into meshes, tags and solver settings and checks the
//! cross-references a pure parse cannot see (tag coverage, observation points
//! inside the domain, excavation finishing before the end time).
//! [`run_scenario`] drives the coupled solver and writes the observation CSV,
//! the per-step report CSV, VTK field snapshots and an echo of the resolved
//! configuration; all outputs are byte-for-byte reproducible for a fixed
//! configuration and seed.

mod config;
mod excavation;
mod observe;
mod runner;
mod vtk;

pub use config::{
    builtin_source, load_config, parse_config, BoundarySection, FlowSpec, MechSpec, Placement,
    ScenarioConfig, TimeUnit, ValueSpec, BUILTIN_NAMES,
};
pub use excavation::ExcavationModel;
pub use observe::{ObservationPoint, ObservationRecord};
pub use runner::{run_scenario, RunSummary, ScenarioSetup};
pub use vtk::write_fields;

use crate::assembly::AssemblyError;
use crate::coupling::CouplingError;
use crate::mesh::MeshError;

pub const SECONDS_PER_DAY: f64 = 86400.0;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("configuration parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error("output failed: {0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    /// Whether the error is the user's configuration rather than a solver or
    /// I/O failure; command-line front ends map this to their exit code.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            ScenarioError::Config(_)
                | ScenarioError::Parse(_)
                | ScenarioError::Mesh(_)
                | ScenarioError::Assembly(_)
        )
    }
}
