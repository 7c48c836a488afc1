//! The TOML scenario schema and its resolution into domain objects.
//!
//! Sections: `[mesh]` (a file path or a generator spec with boundary tagging
//! rules), `[materials]`, `[[boundaries]]`, `[time]`, `[splitting]`, optional
//! `[excavation]`, `[[observation]]` and `[output]`. Time-dependent boundary
//! values use a fixed vocabulary instead of an expression language: a bare
//! number, `{ ramp = { start, end, ramp_time } }`, or `{ staged = { before,
//! after, front_speed } }` switching when the excavation front passes the
//! facet. Unknown keys are fatal everywhere, so misspellings cannot silently
//! fall back to defaults.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::assembly::{FractureParameters, HmParameters, RegionParameters};
use crate::coupling::{CouplingError, FlowSolver, SplittingSettings, TimeScheme};
use crate::mesh::{
    generate_rect_dfm, load_mesh, BoundaryTag, FlowBc, FractureSpec, MechBc, MixedDimMesh,
    RectDfmSpec, TimeValue,
};
use crate::qp::{MpgpSettings, Steplength};
use crate::Real;

use super::excavation::ExcavationModel;
use super::ScenarioError;

pub const BUILTIN_NAMES: [&str; 3] = ["terzaghi", "single_fracture", "excavation2d"];

/// The TOML source of a built-in scenario, also serving as schema examples.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "terzaghi" => Some(include_str!("../../configs/terzaghi.toml")),
        "single_fracture" => Some(include_str!("../../configs/single_fracture.toml")),
        "excavation2d" => Some(include_str!("../../configs/excavation2d.toml")),
        _ => None,
    }
}

/// Parses a scenario from a built-in name or a file path.
pub fn load_config(spec: &str) -> Result<ScenarioConfig, ScenarioError> {
    match builtin_source(spec) {
        Some(source) => ScenarioConfig::from_toml(source),
        None => parse_config(Path::new(spec)),
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let source = std::fs::read_to_string(path).map_err(|e| {
        ScenarioError::Config(format!("could not read {}: {e}", path.display()))
    })?;
    ScenarioConfig::from_toml(&source)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// seed of every random choice (mesh diagonals, random fractures)
    #[serde(default)]
    pub seed: u64,
    pub mesh: MeshSection,
    pub materials: MaterialsSection,
    pub boundaries: Vec<BoundarySection>,
    pub time: TimeSection,
    #[serde(default)]
    pub splitting: SplittingSection,
    pub excavation: Option<ExcavationSection>,
    #[serde(default)]
    pub observation: Vec<ObservationSection>,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_name() -> String {
    "scenario".into()
}

impl ScenarioConfig {
    pub fn from_toml(source: &str) -> Result<Self, ScenarioError> {
        let config: ScenarioConfig = toml::from_str(source)?;
        let problems = config.shape_errors();
        if problems.is_empty() {
            Ok(config)
        } else {
            Err(ScenarioError::Config(problems.join("; ")))
        }
    }

    pub fn to_toml(&self) -> Result<String, ScenarioError> {
        toml::to_string_pretty(self)
            .map_err(|e| ScenarioError::Config(format!("could not serialize the configuration: {e}")))
    }

    /// Structural problems a parse cannot express through types. Mesh-aware
    /// checks (tag coverage, observation points inside the domain) live in
    /// the build step.
    fn shape_errors(&self) -> Vec<String> {
        let mut problems = Vec::new();
        match (&self.mesh.file, &self.mesh.generate) {
            (None, None) => problems.push("mesh: either `file` or `generate` is required".into()),
            (Some(_), Some(_)) => {
                problems.push("mesh: `file` and `generate` are mutually exclusive".into())
            }
            _ => {}
        }
        if let Some(generate) = &self.mesh.generate {
            if generate.cells[0] == 0 || generate.cells[1] == 0 {
                problems.push("mesh.generate: cell counts must be positive".into());
            }
            if generate.tags.is_empty() {
                problems.push("mesh.generate: at least one tag rule is required".into());
            }
            if let Some(random) = &generate.random_fractures {
                if random.count == 0 {
                    problems.push("mesh.generate.random_fractures: count must be positive".into());
                }
                if random.min_span < 2 {
                    problems.push(
                        "mesh.generate.random_fractures: min_span must be at least 2 grid edges"
                            .into(),
                    );
                }
                if random.max_span < random.min_span {
                    problems.push(
                        "mesh.generate.random_fractures: max_span must be at least min_span".into(),
                    );
                }
                if !(random.cross_section > 0.0) {
                    problems.push(
                        "mesh.generate.random_fractures: cross_section must be positive".into(),
                    );
                }
            }
        }
        if self.materials.regions.is_empty() {
            problems.push("materials: at least one region is required".into());
        }
        if self.boundaries.is_empty() {
            problems.push("boundaries: at least one tag definition is required".into());
        }
        let mut seen = BTreeSet::new();
        for tag in &self.boundaries {
            if !seen.insert(tag.name.as_str()) {
                problems.push(format!("boundaries: tag `{}` is defined twice", tag.name));
            }
        }
        seen.clear();
        for point in &self.observation {
            if !seen.insert(point.id.as_str()) {
                problems.push(format!("observation: id `{}` is used twice", point.id));
            }
        }
        if let Some(excavation) = &self.excavation {
            if let Err(e) = excavation.to_model::<f64>(self.time.unit.seconds()).validate() {
                problems.push(e.to_string());
            }
        }
        problems
    }

    /// The time scheme in seconds.
    pub fn time_scheme<T: Real>(&self) -> Result<TimeScheme<T>, ScenarioError> {
        let scale = self.time.unit.seconds();
        TimeScheme::new(
            self.time
                .intervals
                .iter()
                .map(|&[end, dt]| (T::of(end * scale), T::of(dt * scale)))
                .collect(),
        )
        .map_err(config_error)
    }

    pub fn parameters<T: Real>(&self) -> HmParameters<T> {
        self.materials.to_parameters()
    }

    pub fn boundary_tags<T: Real>(&self) -> Vec<BoundaryTag<T>> {
        let scale = self.time.unit.seconds();
        self.boundaries.iter().map(|b| b.to_tag(scale)).collect()
    }

    pub fn splitting_settings<T: Real>(&self) -> Result<SplittingSettings<T>, ScenarioError> {
        let settings = self.splitting.to_settings();
        settings.validate().map_err(config_error)?;
        Ok(settings)
    }

    pub fn excavation_model<T: Real>(&self) -> Option<ExcavationModel<T>> {
        self.excavation
            .as_ref()
            .map(|e| e.to_model(self.time.unit.seconds()))
    }

    /// Field snapshot times in seconds.
    pub fn field_times<T: Real>(&self) -> Vec<T> {
        let scale = self.time.unit.seconds();
        self.output
            .fields_at
            .iter()
            .map(|&t| T::of(t * scale))
            .collect()
    }

    pub fn build_mesh<T: Real>(&self) -> Result<MixedDimMesh<T>, ScenarioError> {
        let mesh = match (&self.mesh.file, &self.mesh.generate) {
            (Some(path), None) => load_mesh(path)?,
            (None, Some(generate)) => generate.build(self.seed)?,
            _ => unreachable!("rejected by shape_errors"),
        };
        if let Some(untagged) = mesh.tag_names.iter().position(|n| n == UNTAGGED) {
            let facets = mesh
                .boundary_facets
                .iter()
                .filter(|f| f.tag == untagged)
                .count();
            return Err(ScenarioError::Config(format!(
                "mesh.generate.tags: {facets} boundary facets match no tag rule"
            )));
        }
        Ok(mesh)
    }
}

/// Maps scheme and settings validation failures onto configuration errors;
/// genuine solver failures are never routed through here.
fn config_error(error: CouplingError) -> ScenarioError {
    ScenarioError::Config(error.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub file: Option<String>,
    pub generate: Option<GenerateSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSection {
    /// [[x0, y0], [x1, y1]]
    pub extents: [[f64; 2]; 2],
    pub cells: [usize; 2],
    #[serde(default)]
    pub fractures: Vec<FractureSection>,
    #[serde(default)]
    pub cutouts: Vec<[[f64; 2]; 2]>,
    pub random_fractures: Option<RandomFracturesSection>,
    /// tried in order; the first matching rule names the facet's tag
    pub tags: Vec<TagRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractureSection {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub cross_section: f64,
}

/// Straight grid-aligned fracture segments drawn reproducibly from the seed.
/// Segments keep clear of the boundary and of each other's edges; crossings
/// are allowed and become junctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomFracturesSection {
    pub count: usize,
    pub cross_section: f64,
    /// segment length range in grid edges
    pub min_span: usize,
    pub max_span: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagRule {
    pub name: String,
    #[serde(rename = "where")]
    pub place: Placement,
}

/// Facet selector: one of the four outer sides, a closed axis-aligned box
/// containing the facet midpoint, or `"rest"` catching everything.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    Rest,
    Side(Side),
    Area([[f64; 2]; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Placement {
    fn matches(&self, extents: [[f64; 2]; 2], mid: [f64; 2], normal: [f64; 2]) -> bool {
        match *self {
            Placement::Rest => true,
            Placement::Side(side) => {
                let tol_x = (extents[1][0] - extents[0][0]) * 1e-9;
                let tol_y = (extents[1][1] - extents[0][1]) * 1e-9;
                match side {
                    Side::Left => normal[0] < -0.5 && (mid[0] - extents[0][0]).abs() <= tol_x,
                    Side::Right => normal[0] > 0.5 && (mid[0] - extents[1][0]).abs() <= tol_x,
                    Side::Bottom => normal[1] < -0.5 && (mid[1] - extents[0][1]).abs() <= tol_y,
                    Side::Top => normal[1] > 0.5 && (mid[1] - extents[1][1]).abs() <= tol_y,
                }
            }
            Placement::Area([[x0, y0], [x1, y1]]) => {
                mid[0] >= x0 && mid[0] <= x1 && mid[1] >= y0 && mid[1] <= y1
            }
        }
    }
}

const UNTAGGED: &str = "untagged";

impl GenerateSection {
    fn build<T: Real>(&self, seed: u64) -> Result<MixedDimMesh<T>, ScenarioError> {
        let mut fractures: Vec<FractureSpec<T>> = self
            .fractures
            .iter()
            .map(|f| FractureSpec {
                start: [T::of(f.start[0]), T::of(f.start[1])],
                end: [T::of(f.end[0]), T::of(f.end[1])],
                cross_section: T::of(f.cross_section),
            })
            .collect();
        fractures.extend(self.plan_random_fractures(seed)?);
        let spec = RectDfmSpec {
            extents: self.extents.map(|p| p.map(T::of)),
            cells: self.cells,
            fractures,
            cutouts: self.cutouts.iter().map(|c| c.map(|p| p.map(T::of))).collect(),
            seed,
        };
        let extents = self.extents;
        let rules = self.tags.clone();
        Ok(generate_rect_dfm(&spec, move |mid, normal| {
            let mid = [mid[0].to_f64().unwrap(), mid[1].to_f64().unwrap()];
            let normal = [normal[0].to_f64().unwrap(), normal[1].to_f64().unwrap()];
            rules
                .iter()
                .find(|rule| rule.place.matches(extents, mid, normal))
                .map_or_else(|| UNTAGGED.into(), |rule| rule.name.clone())
        })?)
    }

    /// Draws the requested number of grid-aligned segments, rejecting
    /// candidates that would leave the domain, touch a cut-out or the
    /// boundary, or reuse an edge of an earlier fracture.
    fn plan_random_fractures<T: Real>(
        &self,
        seed: u64,
    ) -> Result<Vec<FractureSpec<T>>, ScenarioError> {
        let Some(random) = &self.random_fractures else {
            return Ok(Vec::new());
        };
        let [nx, ny] = self.cells;
        let [[x0, y0], [x1, y1]] = self.extents;
        let hx = (x1 - x0) / nx as f64;
        let hy = (y1 - y0) / ny as f64;
        let live = |ci: isize, cj: isize| -> bool {
            if ci < 0 || cj < 0 || ci >= nx as isize || cj >= ny as isize {
                return false;
            }
            let cx = x0 + (ci as f64 + 0.5) * hx;
            let cy = y0 + (cj as f64 + 0.5) * hy;
            !self
                .cutouts
                .iter()
                .any(|&[[ax, ay], [bx, by]]| cx > ax && cx < bx && cy > ay && cy < by)
        };

        let mut used_edges: BTreeSet<[(usize, usize); 2]> = BTreeSet::new();
        let mut diagonals: std::collections::BTreeMap<(usize, usize), bool> =
            std::collections::BTreeMap::new();
        let mut walk =
            |start: (isize, isize), step: (isize, isize), span: usize| -> Option<Edges> {
                edges_of(start, step, span)
            };
        // the explicit fractures claim their edges and diagonals first
        for f in &self.fractures {
            let si = ((f.start[0] - x0) / hx).round() as isize;
            let sj = ((f.start[1] - y0) / hy).round() as isize;
            let ei = ((f.end[0] - x0) / hx).round() as isize;
            let ej = ((f.end[1] - y0) / hy).round() as isize;
            let di = (ei - si).signum();
            let dj = (ej - sj).signum();
            let span = (ei - si).abs().max((ej - sj).abs()) as usize;
            if let Some(edges) = walk((si, sj), (di, dj), span) {
                claim(&mut used_edges, &mut diagonals, &edges);
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut placed: Vec<FractureSpec<T>> = Vec::new();
        let mut attempts = 0usize;
        let cap = 500 * random.count;
        while placed.len() < random.count {
            attempts += 1;
            if attempts > cap {
                return Err(ScenarioError::Config(format!(
                    "mesh.generate.random_fractures: placed only {} of {} fractures after {cap} \
                     attempts; the grid is too crowded",
                    placed.len(),
                    random.count
                )));
            }
            let span = rng.gen_range(random.min_span..=random.max_span);
            let step = match rng.gen_range(0..4) {
                0 => (1, 0),
                1 => (0, 1),
                2 => (1, 1),
                _ => (1, -1),
            };
            let start = (
                rng.gen_range(0..=nx as isize),
                rng.gen_range(0..=ny as isize),
            );
            let Some(edges) = edges_of(start, step, span) else {
                continue;
            };
            if !edges_admissible(&edges, nx, ny, &live, &used_edges, &diagonals) {
                continue;
            }
            claim(&mut used_edges, &mut diagonals, &edges);
            let at = |(i, j): (usize, usize)| -> [T; 2] {
                [T::of(x0 + i as f64 * hx), T::of(y0 + j as f64 * hy)]
            };
            placed.push(FractureSpec {
                start: at(edges.nodes[0]),
                end: at(*edges.nodes.last().expect("span at least 2")),
                cross_section: T::of(random.cross_section),
            });
        }
        Ok(placed)
    }
}

/// A candidate fracture path in grid-index space.
struct Edges {
    nodes: Vec<(usize, usize)>,
    /// grid cell and main/anti orientation of each diagonal edge
    diagonal_cells: Vec<((usize, usize), bool)>,
}

fn edges_of(start: (isize, isize), step: (isize, isize), span: usize) -> Option<Edges> {
    let mut nodes = Vec::with_capacity(span + 1);
    let mut diagonal_cells = Vec::new();
    for k in 0..=span as isize {
        let i = start.0 + k * step.0;
        let j = start.1 + k * step.1;
        if i < 0 || j < 0 {
            return None;
        }
        nodes.push((i as usize, j as usize));
    }
    if step.0 != 0 && step.1 != 0 {
        for pair in nodes.windows(2) {
            let ci = pair[0].0.min(pair[1].0);
            let cj = pair[0].1.min(pair[1].1);
            diagonal_cells.push(((ci, cj), step.0 == step.1));
        }
    }
    Some(Edges { nodes, diagonal_cells })
}

fn edge_key(a: (usize, usize), b: (usize, usize)) -> [(usize, usize); 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

fn claim(
    used: &mut BTreeSet<[(usize, usize); 2]>,
    diagonals: &mut std::collections::BTreeMap<(usize, usize), bool>,
    edges: &Edges,
) {
    for pair in edges.nodes.windows(2) {
        used.insert(edge_key(pair[0], pair[1]));
    }
    for &(cell, main) in &edges.diagonal_cells {
        diagonals.insert(cell, main);
    }
}

fn edges_admissible(
    edges: &Edges,
    nx: usize,
    ny: usize,
    live: &impl Fn(isize, isize) -> bool,
    used: &BTreeSet<[(usize, usize); 2]>,
    diagonals: &std::collections::BTreeMap<(usize, usize), bool>,
) -> bool {
    if edges.nodes.iter().any(|&(i, j)| i > nx || j > ny) {
        return false;
    }
    // endpoints keep a full ring of live cells, so they cannot sit on the
    // outer boundary or a cut-out wall
    for &(i, j) in [edges.nodes[0], *edges.nodes.last().unwrap()].iter() {
        let (i, j) = (i as isize, j as isize);
        if !(live(i - 1, j - 1) && live(i, j - 1) && live(i - 1, j) && live(i, j)) {
            return false;
        }
    }
    for pair in edges.nodes.windows(2) {
        if used.contains(&edge_key(pair[0], pair[1])) {
            return false;
        }
        let (a, b) = (pair[0], pair[1]);
        // both triangles beside the edge must exist
        let interior = if a.1 == b.1 {
            let i = a.0.min(b.0) as isize;
            let j = a.1 as isize;
            live(i, j - 1) && live(i, j)
        } else if a.0 == b.0 {
            let i = a.0 as isize;
            let j = a.1.min(b.1) as isize;
            live(i - 1, j) && live(i, j)
        } else {
            live(a.0.min(b.0) as isize, a.1.min(b.1) as isize)
        };
        if !interior {
            return false;
        }
    }
    for &(cell, main) in &edges.diagonal_cells {
        if diagonals.get(&cell).is_some_and(|&forced| forced != main) {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialsSection {
    #[serde(default = "one")]
    pub head_scale: f64,
    /// (σxx, σyy, σxy)
    #[serde(default)]
    pub initial_stress: [f64; 3],
    #[serde(default)]
    pub body_force: [f64; 2],
    #[serde(default)]
    pub matrix_source: f64,
    #[serde(default)]
    pub fracture_source: f64,
    pub regions: Vec<RegionSection>,
    /// may be omitted for fracture-free meshes
    pub fracture: Option<FractureMaterialSection>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub biot_coefficient: f64,
    pub storativity: f64,
    pub conductivity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractureMaterialSection {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub biot_coefficient: f64,
    pub storativity: f64,
    pub roughness: f64,
    pub viscosity: f64,
    pub fluid_density: f64,
    pub gravity: f64,
    pub min_cross_section: f64,
}

impl MaterialsSection {
    fn to_parameters<T: Real>(&self) -> HmParameters<T> {
        let fracture = self.fracture.unwrap_or(FractureMaterialSection {
            youngs_modulus: 1.0,
            poisson_ratio: 0.0,
            biot_coefficient: 0.0,
            storativity: 0.0,
            roughness: 1.0,
            viscosity: 1e-3,
            fluid_density: 1000.0,
            gravity: 9.81,
            min_cross_section: 1e-6,
        });
        HmParameters {
            regions: self
                .regions
                .iter()
                .map(|r| RegionParameters {
                    youngs_modulus: T::of(r.youngs_modulus),
                    poisson_ratio: T::of(r.poisson_ratio),
                    biot_coefficient: T::of(r.biot_coefficient),
                    storativity: T::of(r.storativity),
                    conductivity: T::of(r.conductivity),
                })
                .collect(),
            fracture: FractureParameters {
                youngs_modulus: T::of(fracture.youngs_modulus),
                poisson_ratio: T::of(fracture.poisson_ratio),
                biot_coefficient: T::of(fracture.biot_coefficient),
                storativity: T::of(fracture.storativity),
                roughness: T::of(fracture.roughness),
                viscosity: T::of(fracture.viscosity),
                fluid_density: T::of(fracture.fluid_density),
                gravity: T::of(fracture.gravity),
                min_cross_section: T::of(fracture.min_cross_section),
            },
            initial_stress: self.initial_stress.map(T::of),
            head_scale: T::of(self.head_scale),
            body_force: self.body_force.map(T::of),
            matrix_source: T::of(self.matrix_source),
            fracture_source: T::of(self.fracture_source),
            conductivity_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub name: String,
    pub flow: FlowSpec,
    pub mech: MechSpec,
}

impl BoundarySection {
    fn to_tag<T: Real>(&self, scale: f64) -> BoundaryTag<T> {
        BoundaryTag {
            name: self.name.clone(),
            flow: match &self.flow {
                FlowSpec::Dirichlet(v) => FlowBc::Dirichlet(v.to_time_value(scale)),
                FlowSpec::Neumann(v) => FlowBc::Neumann(v.to_time_value(scale)),
            },
            mech: match &self.mech {
                MechSpec::Free => MechBc::Traction([constant(0.0), constant(0.0)]),
                MechSpec::Clamped => MechBc::Dirichlet {
                    values: [constant(0.0), constant(0.0)],
                    fixed: [true, true],
                },
                MechSpec::Roller(Axis::X) => MechBc::Dirichlet {
                    values: [constant(0.0), constant(0.0)],
                    fixed: [true, false],
                },
                MechSpec::Roller(Axis::Y) => MechBc::Dirichlet {
                    values: [constant(0.0), constant(0.0)],
                    fixed: [false, true],
                },
                MechSpec::Traction(values) => MechBc::Traction([
                    values[0].to_time_value(scale),
                    values[1].to_time_value(scale),
                ]),
                MechSpec::Displacement { values, fixed } => MechBc::Dirichlet {
                    values: [values[0].to_time_value(scale), values[1].to_time_value(scale)],
                    fixed: *fixed,
                },
                MechSpec::StagedStressRelease { front_speed } => MechBc::StagedStressRelease {
                    front_speed: T::of(front_speed / scale),
                },
            },
        }
    }
}

fn constant<T: Real>(value: f64) -> TimeValue<T> {
    TimeValue::Constant(T::of(value))
}

/// Time-dependent scalar in the fixed vocabulary. Time fields are given in
/// the scenario's time unit and converted to seconds during resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueSpec {
    Constant(f64),
    Ramp { start: f64, end: f64, ramp_time: f64 },
    Staged { before: f64, after: f64, front_speed: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RampTable {
    start: f64,
    end: f64,
    ramp_time: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StagedTable {
    before: f64,
    after: f64,
    front_speed: f64,
}

impl ValueSpec {
    pub fn to_time_value<T: Real>(&self, scale: f64) -> TimeValue<T> {
        match *self {
            ValueSpec::Constant(v) => TimeValue::Constant(T::of(v)),
            ValueSpec::Ramp { start, end, ramp_time } => TimeValue::Ramp {
                start: T::of(start),
                end: T::of(end),
                ramp_time: T::of(ramp_time * scale),
            },
            ValueSpec::Staged { before, after, front_speed } => TimeValue::Staged {
                before: T::of(before),
                after: T::of(after),
                front_speed: T::of(front_speed / scale),
            },
        }
    }

    fn from_value(value: toml::Value) -> Result<Self, String> {
        match value {
            toml::Value::Integer(n) => Ok(ValueSpec::Constant(n as f64)),
            toml::Value::Float(x) => Ok(ValueSpec::Constant(x)),
            toml::Value::Table(table) => {
                let mut entries = table.into_iter();
                let (key, inner) = match (entries.next(), entries.next()) {
                    (Some(entry), None) => entry,
                    _ => {
                        return Err(
                            "a time value table needs exactly one of `constant`, `ramp`, `staged`"
                                .into(),
                        )
                    }
                };
                match key.as_str() {
                    "constant" => inner
                        .try_into()
                        .map(ValueSpec::Constant)
                        .map_err(|e| e.to_string()),
                    "ramp" => inner
                        .try_into()
                        .map(|t: RampTable| ValueSpec::Ramp {
                            start: t.start,
                            end: t.end,
                            ramp_time: t.ramp_time,
                        })
                        .map_err(|e| format!("ramp: {e}")),
                    "staged" => inner
                        .try_into()
                        .map(|t: StagedTable| ValueSpec::Staged {
                            before: t.before,
                            after: t.after,
                            front_speed: t.front_speed,
                        })
                        .map_err(|e| format!("staged: {e}")),
                    other => Err(format!(
                        "unknown time value kind `{other}`, expected `constant`, `ramp` or `staged`"
                    )),
                }
            }
            other => Err(format!(
                "expected a number or a `ramp`/`staged` table, found {}",
                other.type_str()
            )),
        }
    }
}

impl<'de> Deserialize<'de> for ValueSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = toml::Value::deserialize(deserializer)?;
        ValueSpec::from_value(value).map_err(serde::de::Error::custom)
    }
}

impl Serialize for ValueSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            ValueSpec::Constant(v) => serializer.serialize_f64(v),
            ValueSpec::Ramp { start, end, ramp_time } => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("ramp", &RampTable { start, end, ramp_time })?;
                map.end()
            }
            ValueSpec::Staged { before, after, front_speed } => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("staged", &StagedTable { before, after, front_speed })?;
                map.end()
            }
        }
    }
}

/// Flow condition vocabulary: `{ dirichlet = <value> }` prescribes the
/// pressure head, `{ neumann = <value> }` the outward normal flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowSpec {
    Dirichlet(ValueSpec),
    Neumann(ValueSpec),
}

impl<'de> Deserialize<'de> for FlowSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = toml::Value::deserialize(deserializer)?;
        let toml::Value::Table(table) = value else {
            return Err(D::Error::custom(
                "a flow condition is a table with one of `dirichlet`, `neumann`",
            ));
        };
        let mut entries = table.into_iter();
        let (key, inner) = match (entries.next(), entries.next()) {
            (Some(entry), None) => entry,
            _ => {
                return Err(D::Error::custom(
                    "a flow condition needs exactly one of `dirichlet`, `neumann`",
                ))
            }
        };
        let spec = ValueSpec::from_value(inner).map_err(D::Error::custom)?;
        match key.as_str() {
            "dirichlet" => Ok(FlowSpec::Dirichlet(spec)),
            "neumann" => Ok(FlowSpec::Neumann(spec)),
            other => Err(D::Error::custom(format!(
                "unknown flow condition `{other}`, expected `dirichlet` or `neumann`"
            ))),
        }
    }
}

impl Serialize for FlowSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(1))?;
        match self {
            FlowSpec::Dirichlet(v) => map.serialize_entry("dirichlet", v)?,
            FlowSpec::Neumann(v) => map.serialize_entry("neumann", v)?,
        }
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Mechanical condition vocabulary: `"free"` (zero traction), `"clamped"`,
/// `{ roller = "x"|"y" }` (the named component held at zero), `{ traction =
/// [tx, ty] }`, `{ displacement = { values, fixed } }`, or
/// `{ staged_stress_release = { front_speed } }` carrying the initial-stress
/// traction until the excavation front passes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MechSpec {
    Free,
    Clamped,
    Roller(Axis),
    Traction([ValueSpec; 2]),
    Displacement { values: [ValueSpec; 2], fixed: [bool; 2] },
    StagedStressRelease { front_speed: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DisplacementTable {
    values: [ValueSpec; 2],
    fixed: [bool; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StressReleaseTable {
    front_speed: f64,
}

impl<'de> Deserialize<'de> for MechSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = toml::Value::deserialize(deserializer)?;
        match value {
            toml::Value::String(word) => match word.as_str() {
                "free" => Ok(MechSpec::Free),
                "clamped" => Ok(MechSpec::Clamped),
                other => Err(D::Error::custom(format!(
                    "unknown mechanical condition `{other}`, expected `free` or `clamped`"
                ))),
            },
            toml::Value::Table(table) => {
                let mut entries = table.into_iter();
                let (key, inner) = match (entries.next(), entries.next()) {
                    (Some(entry), None) => entry,
                    _ => {
                        return Err(D::Error::custom(
                            "a mechanical condition table needs exactly one of `roller`, \
                             `traction`, `displacement`, `staged_stress_release`",
                        ))
                    }
                };
                match key.as_str() {
                    "roller" => match inner.as_str() {
                        Some("x") => Ok(MechSpec::Roller(Axis::X)),
                        Some("y") => Ok(MechSpec::Roller(Axis::Y)),
                        _ => Err(D::Error::custom("roller: expected \"x\" or \"y\"")),
                    },
                    "traction" => {
                        let toml::Value::Array(items) = inner else {
                            return Err(D::Error::custom("traction: expected two components"));
                        };
                        let [x, y]: [toml::Value; 2] = items
                            .try_into()
                            .map_err(|_| D::Error::custom("traction: expected two components"))?;
                        Ok(MechSpec::Traction([
                            ValueSpec::from_value(x).map_err(D::Error::custom)?,
                            ValueSpec::from_value(y).map_err(D::Error::custom)?,
                        ]))
                    }
                    "displacement" => inner
                        .try_into()
                        .map(|t: DisplacementTable| MechSpec::Displacement {
                            values: t.values,
                            fixed: t.fixed,
                        })
                        .map_err(|e| D::Error::custom(format!("displacement: {e}"))),
                    "staged_stress_release" => inner
                        .try_into()
                        .map(|t: StressReleaseTable| MechSpec::StagedStressRelease {
                            front_speed: t.front_speed,
                        })
                        .map_err(|e| D::Error::custom(format!("staged_stress_release: {e}"))),
                    other => Err(D::Error::custom(format!(
                        "unknown mechanical condition `{other}`, expected `roller`, `traction`, \
                         `displacement` or `staged_stress_release`"
                    ))),
                }
            }
            _ => Err(D::Error::custom(
                "a mechanical condition is \"free\", \"clamped\" or a one-key table",
            )),
        }
    }
}

impl Serialize for MechSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            MechSpec::Free => serializer.serialize_str("free"),
            MechSpec::Clamped => serializer.serialize_str("clamped"),
            MechSpec::Roller(axis) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("roller", if *axis == Axis::X { "x" } else { "y" })?;
                map.end()
            }
            MechSpec::Traction(values) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("traction", values)?;
                map.end()
            }
            MechSpec::Displacement { values, fixed } => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry(
                    "displacement",
                    &DisplacementTable { values: *values, fixed: *fixed },
                )?;
                map.end()
            }
            MechSpec::StagedStressRelease { front_speed } => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry(
                    "staged_stress_release",
                    &StressReleaseTable { front_speed: *front_speed },
                )?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Placement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = toml::Value::deserialize(deserializer)?;
        match value {
            toml::Value::String(word) if word == "rest" => Ok(Placement::Rest),
            toml::Value::String(other) => Err(D::Error::custom(format!(
                "unknown placement `{other}`, expected \"rest\" or a `side`/`box` table"
            ))),
            toml::Value::Table(table) => {
                let mut entries = table.into_iter();
                let (key, inner) = match (entries.next(), entries.next()) {
                    (Some(entry), None) => entry,
                    _ => {
                        return Err(D::Error::custom(
                            "a placement table needs exactly one of `side`, `box`",
                        ))
                    }
                };
                match key.as_str() {
                    "side" => match inner.as_str() {
                        Some("left") => Ok(Placement::Side(Side::Left)),
                        Some("right") => Ok(Placement::Side(Side::Right)),
                        Some("bottom") => Ok(Placement::Side(Side::Bottom)),
                        Some("top") => Ok(Placement::Side(Side::Top)),
                        _ => Err(D::Error::custom(
                            "side: expected \"left\", \"right\", \"bottom\" or \"top\"",
                        )),
                    },
                    "box" => inner
                        .try_into()
                        .map(Placement::Area)
                        .map_err(|e| D::Error::custom(format!("box: {e}"))),
                    other => Err(D::Error::custom(format!(
                        "unknown placement `{other}`, expected `side` or `box`"
                    ))),
                }
            }
            _ => Err(D::Error::custom(
                "a placement is \"rest\" or a one-key `side`/`box` table",
            )),
        }
    }
}

impl Serialize for Placement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Placement::Rest => serializer.serialize_str("rest"),
            Placement::Side(side) => {
                let mut map = serializer.serialize_map(Some(1))?;
                let name = match side {
                    Side::Left => "left",
                    Side::Right => "right",
                    Side::Bottom => "bottom",
                    Side::Top => "top",
                };
                map.serialize_entry("side", name)?;
                map.end()
            }
            Placement::Area(corners) => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("box", corners)?;
                map.end()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default = "default_unit")]
    pub unit: TimeUnit,
    /// (interval end, step) pairs in the chosen unit, covering (0, T]
    pub intervals: Vec<[f64; 2]>,
}

fn default_unit() -> TimeUnit {
    TimeUnit::Second
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Second,
    Day,
}

impl TimeUnit {
    pub fn seconds(self) -> f64 {
        match self {
            TimeUnit::Second => 1.0,
            TimeUnit::Day => super::SECONDS_PER_DAY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingSection {
    #[serde(default = "default_outer_cap")]
    pub max_outer_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_solver")]
    pub flow_solver: FlowSolverSpec,
    #[serde(default = "yes")]
    pub warm_start: bool,
    #[serde(default)]
    pub mpgp: MpgpSection,
}

fn default_outer_cap() -> usize {
    30
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_solver() -> FlowSolverSpec {
    FlowSolverSpec::Direct
}

fn yes() -> bool {
    true
}

impl Default for SplittingSection {
    fn default() -> Self {
        SplittingSection {
            max_outer_iterations: default_outer_cap(),
            tolerance: default_tolerance(),
            flow_solver: default_solver(),
            warm_start: true,
            mpgp: MpgpSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowSolverSpec {
    Direct,
    SchurCg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpgpSection {
    #[serde(default = "one")]
    pub proportioning: f64,
    #[serde(default = "default_tolerance")]
    pub relative_tolerance: f64,
    pub max_hessian_multiplications: Option<usize>,
    /// fixed expansion steplength; omitted means automatic from the dual
    /// Hessian norm
    pub expansion_steplength: Option<f64>,
}

impl Default for MpgpSection {
    fn default() -> Self {
        MpgpSection {
            proportioning: 1.0,
            relative_tolerance: default_tolerance(),
            max_hessian_multiplications: None,
            expansion_steplength: None,
        }
    }
}

impl SplittingSection {
    fn to_settings<T: Real>(&self) -> SplittingSettings<T> {
        SplittingSettings {
            max_outer_iterations: self.max_outer_iterations,
            tolerance: T::of(self.tolerance),
            flow_solver: match self.flow_solver {
                FlowSolverSpec::Direct => FlowSolver::Direct,
                FlowSolverSpec::SchurCg => FlowSolver::SchurCg,
            },
            mpgp: MpgpSettings {
                proportioning_parameter: T::of(self.mpgp.proportioning),
                expansion_steplength: match self.mpgp.expansion_steplength {
                    Some(step) => Steplength::Fixed(T::of(step)),
                    None => Steplength::Auto,
                },
                relative_tolerance: T::of(self.mpgp.relative_tolerance),
                max_hessian_multiplications: self.mpgp.max_hessian_multiplications,
                trace_path: None,
            },
            warm_start: self.warm_start,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcavationSection {
    /// front advance per time unit (m)
    pub front_speed: f64,
    pub length: f64,
    #[serde(default)]
    pub axis_level: f64,
    pub radius: f64,
    pub transition_start: f64,
    pub transition_end: f64,
    pub intact_conductivity: f64,
    pub damaged_conductivity: f64,
}

impl ExcavationSection {
    fn to_model<T: Real>(&self, scale: f64) -> ExcavationModel<T> {
        ExcavationModel {
            front_speed: T::of(self.front_speed / scale),
            length: T::of(self.length),
            axis_level: T::of(self.axis_level),
            radius: T::of(self.radius),
            transition_start: T::of(self.transition_start),
            transition_end: T::of(self.transition_end),
            intact_conductivity: T::of(self.intact_conductivity),
            damaged_conductivity: T::of(self.damaged_conductivity),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSection {
    pub id: String,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// field snapshot times in the scenario's time unit; each must land on a
    /// time-scheme step (or 0)
    #[serde(default)]
    pub fields_at: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [mesh.generate]
        extents = [[0.0, 0.0], [1.0, 1.0]]
        cells = [2, 2]
        tags = [{ name = "wall", where = "rest" }]

        [materials]
        regions = [{ youngs_modulus = 10.0, poisson_ratio = 0.25, biot_coefficient = 0.5, storativity = 1e-2, conductivity = 1.0 }]

        [[boundaries]]
        name = "wall"
        flow = { neumann = 0.0 }
        mech = "free"

        [time]
        intervals = [[1.0, 0.25]]
    "#;

    #[test]
    fn minimal_config_fills_the_defaults() {
        let config = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(config.name, "scenario");
        assert_eq!(config.seed, 0);
        assert_eq!(config.splitting, SplittingSection::default());
        assert_eq!(config.time.unit, TimeUnit::Second);
        assert!(config.excavation.is_none());
        assert!(config.observation.is_empty());
        assert!(config.output.fields_at.is_empty());
        assert_eq!(config.materials.head_scale, 1.0);
        assert_eq!(config.materials.initial_stress, [0.0; 3]);
        let mesh = config.build_mesh::<f64>().unwrap();
        assert_eq!(mesh.n_triangles(), 8);
        let scheme = config.time_scheme::<f64>().unwrap();
        assert_eq!(scheme.n_steps(), 4);
    }

    #[test]
    fn misspelled_keys_are_named() {
        let bad = MINIMAL.replace("intervals", "intervalls");
        let err = ScenarioConfig::from_toml(&bad).unwrap_err();
        assert!(err.to_string().contains("intervalls"), "{err}");
        assert!(err.is_configuration());

        let bad = format!("{MINIMAL}\n[splitting]\ntolerence = 1e-6\n");
        let err = ScenarioConfig::from_toml(&bad).unwrap_err();
        assert!(err.to_string().contains("tolerence"), "{err}");
    }

    #[test]
    fn value_vocabulary_parses_all_three_kinds() {
        let source = MINIMAL.replace(
            "flow = { neumann = 0.0 }",
            "flow = { dirichlet = { ramp = { start = 0.0, end = 10.0, ramp_time = 0.5 } } }",
        );
        let config = ScenarioConfig::from_toml(&source).unwrap();
        assert_eq!(
            config.boundaries[0].flow,
            FlowSpec::Dirichlet(ValueSpec::Ramp { start: 0.0, end: 10.0, ramp_time: 0.5 })
        );

        let source = MINIMAL.replace(
            "flow = { neumann = 0.0 }",
            "flow = { dirichlet = { staged = { before = 300.0, after = 0.0, front_speed = 1.0 } } }",
        );
        let config = ScenarioConfig::from_toml(&source).unwrap();
        let FlowSpec::Dirichlet(staged) = config.boundaries[0].flow else {
            panic!("expected a dirichlet condition")
        };
        // a staged speed of 1 m/day resolves to m/s
        let source_day = source.replace("intervals", "unit = \"day\"\nintervals");
        let config_day = ScenarioConfig::from_toml(&source_day).unwrap();
        let tags = config_day.boundary_tags::<f64>();
        match tags[0].flow {
            FlowBc::Dirichlet(TimeValue::Staged { front_speed, .. }) => {
                assert!((front_speed - 1.0 / 86400.0).abs() < 1e-20);
            }
            _ => panic!("expected a staged head"),
        }
        assert_eq!(
            staged,
            ValueSpec::Staged { before: 300.0, after: 0.0, front_speed: 1.0 }
        );

        let err = ScenarioConfig::from_toml(&MINIMAL.replace(
            "flow = { neumann = 0.0 }",
            "flow = { dirichlet = { pulse = { start = 0.0 } } }",
        ))
        .unwrap_err();
        assert!(err.to_string().contains("pulse"), "{err}");

        let err = ScenarioConfig::from_toml(&MINIMAL.replace(
            "flow = { neumann = 0.0 }",
            "flow = { dirichlet = { ramp = { start = 0.0, end = 1.0, ramptime = 0.5 } } }",
        ))
        .unwrap_err();
        assert!(err.to_string().contains("ramptime"), "{err}");
    }

    #[test]
    fn mech_vocabulary_resolves_to_boundary_conditions() {
        let cases = [
            ("\"clamped\"", MechSpec::Clamped),
            ("{ roller = \"y\" }", MechSpec::Roller(Axis::Y)),
            (
                "{ traction = [0.0, { ramp = { start = 0.0, end = -4.0, ramp_time = 0.2 } }] }",
                MechSpec::Traction([
                    ValueSpec::Constant(0.0),
                    ValueSpec::Ramp { start: 0.0, end: -4.0, ramp_time: 0.2 },
                ]),
            ),
            (
                "{ staged_stress_release = { front_speed = 2.0 } }",
                MechSpec::StagedStressRelease { front_speed: 2.0 },
            ),
        ];
        for (snippet, expected) in cases {
            let source = MINIMAL.replace("mech = \"free\"", &format!("mech = {snippet}"));
            let config = ScenarioConfig::from_toml(&source).unwrap();
            assert_eq!(config.boundaries[0].mech, expected);
        }
        let tags = ScenarioConfig::from_toml(MINIMAL)
            .unwrap()
            .boundary_tags::<f64>();
        assert_eq!(
            tags[0].mech,
            MechBc::Traction([TimeValue::Constant(0.0), TimeValue::Constant(0.0)])
        );

        let err = ScenarioConfig::from_toml(
            &MINIMAL.replace("mech = \"free\"", "mech = { pinned = true }"),
        )
        .unwrap_err();
        assert!(err.to_string().contains("pinned"), "{err}");
    }

    #[test]
    fn transition_band_must_be_ordered() {
        let source = format!(
            "{MINIMAL}\n[excavation]\nfront_speed = 1.0\nlength = 1.0\nradius = 0.1\n\
             transition_start = 4.0\ntransition_end = 1.0\nintact_conductivity = 3e-13\n\
             damaged_conductivity = 1e-8\n"
        );
        let err = ScenarioConfig::from_toml(&source).unwrap_err();
        assert!(err.to_string().contains("transition_start"), "{err}");
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let source = format!(
            "{MINIMAL}\n[[boundaries]]\nname = \"wall\"\nflow = {{ neumann = 0.0 }}\nmech = \"free\"\n"
        );
        let err = ScenarioConfig::from_toml(&source).unwrap_err();
        assert!(err.to_string().contains("defined twice"), "{err}");

        let source = format!(
            "{MINIMAL}\n[[observation]]\nid = \"p\"\nposition = [0.5, 0.5]\n\
             [[observation]]\nid = \"p\"\nposition = [0.25, 0.5]\n"
        );
        let err = ScenarioConfig::from_toml(&source).unwrap_err();
        assert!(err.to_string().contains("used twice"), "{err}");
    }

    #[test]
    fn mesh_source_must_be_unique() {
        let err = ScenarioConfig::from_toml(&MINIMAL.replace(
            "[mesh.generate]",
            "[mesh]\nfile = \"grid.txt\"\n[mesh.generate]",
        ))
        .unwrap_err();
        assert!(err.to_string().contains("mutually exclusive"), "{err}");
    }

    #[test]
    fn resolved_configs_round_trip_through_toml() {
        for name in BUILTIN_NAMES {
            let config = load_config(name).unwrap();
            let echoed = config.to_toml().unwrap();
            let reparsed = ScenarioConfig::from_toml(&echoed).unwrap();
            assert_eq!(config, reparsed, "{name} round trip");
        }
    }

    #[test]
    fn builtin_meshes_and_schedules_resolve() {
        for name in BUILTIN_NAMES {
            let config = load_config(name).unwrap();
            assert_eq!(config.name, name);
            let mesh = config.build_mesh::<f64>().unwrap();
            assert!(mesh.validate().is_empty(), "{name} mesh is consistent");
            config.time_scheme::<f64>().unwrap();
            config.splitting_settings::<f64>().unwrap();
            config.parameters::<f64>().validate().unwrap();
        }
    }

    #[test]
    fn tag_rules_cover_or_fail_loudly() {
        let source = MINIMAL.replace(
            "tags = [{ name = \"wall\", where = \"rest\" }]",
            "tags = [{ name = \"lid\", where = { side = \"top\" } }]",
        );
        let config = ScenarioConfig::from_toml(&source).unwrap();
        let err = config.build_mesh::<f64>().unwrap_err();
        assert!(err.to_string().contains("match no tag rule"), "{err}");

        let source = MINIMAL.replace(
            "tags = [{ name = \"wall\", where = \"rest\" }]",
            "tags = [{ name = \"lid\", where = { side = \"top\" } }, { name = \"wall\", where = \"rest\" }]",
        );
        let config = ScenarioConfig::from_toml(&source).unwrap();
        let mesh = config.build_mesh::<f64>().unwrap();
        assert!(mesh.tag_names.contains(&"lid".to_string()));
        assert!(mesh.tag_names.contains(&"wall".to_string()));
        // the lid rule only catches facets on the upper extent line
        let lid = mesh.tag_names.iter().position(|n| n == "lid").unwrap();
        for facet in mesh.boundary_facets.iter().filter(|f| f.tag == lid) {
            assert!(facet.nodes.iter().all(|&n| mesh.nodes[n][1] == 1.0));
        }
    }

    #[test]
    fn random_fractures_are_reproducible_and_interior() {
        let source = MINIMAL.replace(
            "cells = [2, 2]",
            "cells = [12, 12]\nrandom_fractures = { count = 6, cross_section = 1e-4, min_span = 2, max_span = 4 }",
        );
        let config = ScenarioConfig::from_toml(&source).unwrap();
        let a = config.build_mesh::<f64>().unwrap();
        let b = config.build_mesh::<f64>().unwrap();
        assert_eq!(a.fractures, b.fractures);
        assert!(a.n_fractures() >= 6 * 2, "each span is at least two edges");
        assert!(a.boundary_endpoints().is_empty(), "segments stay interior");
        assert!(a.validate().is_empty());

        let mut other = config.clone();
        other.seed = 1;
        let c = other.build_mesh::<f64>().unwrap();
        assert_ne!(a.fractures, c.fractures, "the seed moves the segments");
    }

    #[test]
    fn crowded_random_fractures_fail_with_a_budget_message() {
        let source = MINIMAL.replace(
            "cells = [2, 2]",
            "cells = [3, 3]\nrandom_fractures = { count = 40, cross_section = 1e-4, min_span = 2, max_span = 2 }",
        );
        let config = ScenarioConfig::from_toml(&source).unwrap();
        let err = config.build_mesh::<f64>().unwrap_err();
        assert!(err.to_string().contains("too crowded"), "{err}");
    }
}
