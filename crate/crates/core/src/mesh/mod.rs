//! Mixed-dimensional meshes: a 2D triangle mesh for the porous matrix and a
//! compatible 1D segment mesh for the fracture network.
//!
//! Fracture segments coincide with matrix faces. Matrix nodes along fracture
//! interiors are duplicated so matrix fields can jump across a fracture; the
//! two walls of a fracture cell are therefore two distinct matrix faces, the
//! + wall on the side its unit normal points into. Fracture cells carry their
//! own nodes, shared where fractures intersect, so fracture fields stay
//! continuous through intersections. Duplicates merge back together at
//! fracture tips, keeping the matrix connected around the end of a crack.

mod generate;
mod io;

pub use generate::{generate_rect_dfm, FractureSpec, RectDfmSpec};
pub use io::{load_mesh, save_mesh};

use crate::Real;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh validation failed: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("unknown cell id {id}")]
    UnknownCell { id: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    let shown: Vec<String> = violations.iter().take(3).map(Violation::to_string).collect();
    let suffix = if violations.len() > 3 {
        format!(" (+{} more)", violations.len() - 3)
    } else {
        String::new()
    };
    format!("{}{}", shown.join("; "), suffix)
}

/// A broken mesh invariant, naming the rule and the offending entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub invariant: String,
    pub entity: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({})", self.invariant, self.entity)
    }
}

/// Boundary value that may change over time. `Staged` values switch when the
/// excavation front, advancing along the first coordinate axis at
/// `front_speed`, passes the entity's staging coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeValue<T> {
    Constant(T),
    /// linear from `start` to `end` over [0, ramp_time], then `end`
    Ramp { start: T, end: T, ramp_time: T },
    Staged { before: T, after: T, front_speed: T },
}

impl<T: Real> TimeValue<T> {
    pub fn at(&self, time: T, staging_coord: T) -> T {
        match *self {
            TimeValue::Constant(v) => v,
            TimeValue::Ramp { start, end, ramp_time } => {
                if time >= ramp_time {
                    end
                } else if time <= T::zero() {
                    start
                } else {
                    start + (end - start) * time / ramp_time
                }
            }
            TimeValue::Staged { before, after, front_speed } => {
                if staging_coord < front_speed * time {
                    after
                } else {
                    before
                }
            }
        }
    }
}

/// Flow condition on a boundary facet: prescribed pressure head (natural in
/// the mixed form, enters the flux right side) or prescribed normal flux
/// (essential, eliminates the facet's flux unknown).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowBc<T> {
    Dirichlet(TimeValue<T>),
    Neumann(TimeValue<T>),
}

/// Mechanical condition on a boundary facet. Dirichlet fixes the masked
/// displacement components (a roller is one fixed component on an
/// axis-aligned facet); the staged variant applies the initial-stress
/// traction σ₀·n until the excavation front passes, zero afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MechBc<T> {
    Dirichlet {
        values: [TimeValue<T>; 2],
        fixed: [bool; 2],
    },
    Traction([TimeValue<T>; 2]),
    StagedStressRelease { front_speed: T },
}

/// Named pairing of one flow and one mechanical condition; every boundary
/// facet references exactly one tag.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTag<T> {
    pub name: String,
    pub flow: FlowBc<T>,
    pub mech: MechBc<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFacet {
    /// matrix node pair, unordered
    pub nodes: [usize; 2],
    /// index into the mesh tag-name table
    pub tag: usize,
}

/// One fracture segment cell. The walls are given as unordered matrix node
/// pairs; the wall the unit normal points into is the + wall.
#[derive(Debug, Clone, PartialEq)]
pub struct FractureCell<T> {
    /// fracture node ids, defining the tangent direction
    pub nodes: [usize; 2],
    /// initial cross-section δ (m)
    pub cross_section: T,
    /// oriented unit normal ν⁺
    pub normal: [T; 2],
    pub plus_wall: [usize; 2],
    pub minus_wall: [usize; 2],
}

/// Matrix trace nodes of one fracture cell, ordered to match the cell's
/// fracture nodes. Derived during construction; `None` when the walls do not
/// coincide with the fracture geometry (reported by validate).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WallTrace {
    pub plus: [usize; 2],
    pub minus: [usize; 2],
}

/// Tangent frame and trace information of a fracture cell.
#[derive(Debug, Clone, Copy)]
pub struct FractureFrame<T> {
    pub length: T,
    pub tangent: [T; 2],
    pub normal: [T; 2],
    /// matrix node ids aligned with the cell's fracture nodes
    pub plus_trace: [usize; 2],
    pub minus_trace: [usize; 2],
    /// triangles owning the + and − walls
    pub plus_triangle: usize,
    pub minus_triangle: usize,
}

#[derive(Debug, Clone)]
pub struct MixedDimMesh<T> {
    pub nodes: Vec<[T; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub triangle_regions: Vec<usize>,
    pub fracture_nodes: Vec<[T; 2]>,
    pub fractures: Vec<FractureCell<T>>,
    pub boundary_facets: Vec<BoundaryFacet>,
    pub tag_names: Vec<String>,
    // derived connectivity, built once in `new`
    faces: Vec<[usize; 2]>,
    face_triangles: Vec<(usize, Option<usize>)>,
    wall_traces: Vec<Option<WallTrace>>,
    interior_tips: Vec<usize>,
    junctions: Vec<usize>,
    boundary_endpoints: Vec<usize>,
}

impl<T: Real> MixedDimMesh<T> {
    /// Builds a mesh and its derived connectivity. Out-of-range references
    /// are rejected here; geometric and semantic invariants are left to
    /// [`MixedDimMesh::validate`] so that broken meshes can be inspected.
    pub fn new(
        nodes: Vec<[T; 2]>,
        triangles: Vec<[usize; 3]>,
        triangle_regions: Vec<usize>,
        fracture_nodes: Vec<[T; 2]>,
        fractures: Vec<FractureCell<T>>,
        boundary_facets: Vec<BoundaryFacet>,
        tag_names: Vec<String>,
    ) -> Result<Self, MeshError> {
        let mut violations = Vec::new();
        for (i, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&n| n >= nodes.len()) {
                violations.push(Violation {
                    invariant: "triangle references an unknown node".into(),
                    entity: format!("triangle {i}"),
                });
            }
        }
        if triangle_regions.len() != triangles.len() {
            violations.push(Violation {
                invariant: "one region per triangle".into(),
                entity: format!(
                    "{} regions for {} triangles",
                    triangle_regions.len(),
                    triangles.len()
                ),
            });
        }
        for (i, cell) in fractures.iter().enumerate() {
            if cell.nodes.iter().any(|&n| n >= fracture_nodes.len()) {
                violations.push(Violation {
                    invariant: "fracture cell references an unknown fracture node".into(),
                    entity: format!("fracture cell {i}"),
                });
            }
            if cell
                .plus_wall
                .iter()
                .chain(cell.minus_wall.iter())
                .any(|&n| n >= nodes.len())
            {
                violations.push(Violation {
                    invariant: "fracture wall references an unknown node".into(),
                    entity: format!("fracture cell {i}"),
                });
            }
        }
        for (i, facet) in boundary_facets.iter().enumerate() {
            if facet.nodes.iter().any(|&n| n >= nodes.len()) {
                violations.push(Violation {
                    invariant: "boundary facet references an unknown node".into(),
                    entity: format!("boundary facet {i}"),
                });
            }
            if facet.tag >= tag_names.len() {
                violations.push(Violation {
                    invariant: "boundary facet references an unknown tag".into(),
                    entity: format!("boundary facet {i}"),
                });
            }
        }
        if !violations.is_empty() {
            return Err(MeshError::Invalid(violations));
        }

        let mut mesh = MixedDimMesh {
            nodes,
            triangles,
            triangle_regions,
            fracture_nodes,
            fractures,
            boundary_facets,
            tag_names,
            faces: Vec::new(),
            face_triangles: Vec::new(),
            wall_traces: Vec::new(),
            interior_tips: Vec::new(),
            junctions: Vec::new(),
            boundary_endpoints: Vec::new(),
        };
        mesh.build_faces();
        mesh.build_wall_traces();
        mesh.build_fracture_node_sets();
        Ok(mesh)
    }

    fn build_faces(&mut self) {
        let mut pairs: Vec<[usize; 2]> = Vec::with_capacity(3 * self.triangles.len());
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                pairs.push([a.min(b), a.max(b)]);
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        self.faces = pairs;
        self.face_triangles = vec![(usize::MAX, None); self.faces.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let f = self
                    .face_id(a, b)
                    .expect("triangle edges are in the face table by construction");
                let slot = &mut self.face_triangles[f];
                if slot.0 == usize::MAX {
                    slot.0 = t;
                } else {
                    slot.1 = Some(t);
                }
            }
        }
    }

    fn build_wall_traces(&mut self) {
        self.wall_traces = self
            .fractures
            .iter()
            .map(|cell| {
                let order = |wall: [usize; 2]| -> Option<[usize; 2]> {
                    let target = self.fracture_nodes[cell.nodes[0]];
                    let exact = |n: usize| self.nodes[n] == target;
                    if exact(wall[0]) && self.nodes[wall[1]] == self.fracture_nodes[cell.nodes[1]] {
                        Some(wall)
                    } else if exact(wall[1])
                        && self.nodes[wall[0]] == self.fracture_nodes[cell.nodes[1]]
                    {
                        Some([wall[1], wall[0]])
                    } else {
                        None
                    }
                };
                let plus = order(cell.plus_wall)?;
                let minus = order(cell.minus_wall)?;
                Some(WallTrace { plus, minus })
            })
            .collect();
    }

    fn build_fracture_node_sets(&mut self) {
        let mut valence = vec![0usize; self.fracture_nodes.len()];
        for cell in &self.fractures {
            for &n in &cell.nodes {
                valence[n] += 1;
            }
        }
        let mut node_on_boundary = vec![false; self.nodes.len()];
        let trace_faces = self.wall_face_set();
        for (f, &pair) in self.faces.iter().enumerate() {
            if self.face_triangles[f].1.is_none() && !trace_faces.contains(&f) {
                node_on_boundary[pair[0]] = true;
                node_on_boundary[pair[1]] = true;
            }
        }
        let mut touches_boundary = vec![false; self.fracture_nodes.len()];
        for (cell, trace) in self.fractures.iter().zip(&self.wall_traces) {
            let Some(trace) = trace else { continue };
            for end in 0..2 {
                if node_on_boundary[trace.plus[end]] || node_on_boundary[trace.minus[end]] {
                    touches_boundary[cell.nodes[end]] = true;
                }
            }
        }
        for n in 0..self.fracture_nodes.len() {
            match valence[n] {
                0 => {}
                1 if touches_boundary[n] => self.boundary_endpoints.push(n),
                1 => self.interior_tips.push(n),
                2 => {}
                _ => self.junctions.push(n),
            }
        }
    }

    fn wall_face_set(&self) -> std::collections::BTreeSet<usize> {
        self.fractures
            .iter()
            .flat_map(|cell| [cell.plus_wall, cell.minus_wall])
            .filter_map(|wall| self.face_id(wall[0], wall[1]))
            .collect()
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_fractures(&self) -> usize {
        self.fractures.len()
    }

    /// All matrix faces as node pairs (min, max), in lexicographic order;
    /// the position in this list is the face id used in mesh files.
    pub fn faces(&self) -> &[[usize; 2]] {
        &self.faces
    }

    pub fn face_id(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.faces.binary_search(&key).ok()
    }

    /// Adjacent triangles of a face; boundary and fracture-wall faces have
    /// exactly one.
    pub fn face_triangles(&self, face: usize) -> (usize, Option<usize>) {
        self.face_triangles[face]
    }

    /// Fracture node ids of interior fracture tips (duplicates merged there).
    pub fn interior_tips(&self) -> &[usize] {
        &self.interior_tips
    }

    /// Fracture node ids where three or more fracture cells meet.
    pub fn junctions(&self) -> &[usize] {
        &self.junctions
    }

    /// Fracture node ids lying on the domain boundary.
    pub fn boundary_endpoints(&self) -> &[usize] {
        &self.boundary_endpoints
    }

    /// Matrix node copies coincident with a fracture node, collected from
    /// the wall traces of its incident cells.
    pub fn matrix_nodes_at(&self, fracture_node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (cell, trace) in self.fractures.iter().zip(&self.wall_traces) {
            let Some(trace) = trace else { continue };
            for end in 0..2 {
                if cell.nodes[end] == fracture_node {
                    out.push(trace.plus[end]);
                    out.push(trace.minus[end]);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn triangle_area(&self, cell: usize) -> Result<T, MeshError> {
        let tri = self
            .triangles
            .get(cell)
            .ok_or(MeshError::UnknownCell { id: cell })?;
        Ok(triangle_area_of(&self.nodes, *tri))
    }

    pub fn triangle_centroid(&self, cell: usize) -> [T; 2] {
        let tri = self.triangles[cell];
        let third = T::of(1.0 / 3.0);
        [
            (self.nodes[tri[0]][0] + self.nodes[tri[1]][0] + self.nodes[tri[2]][0]) * third,
            (self.nodes[tri[0]][1] + self.nodes[tri[1]][1] + self.nodes[tri[2]][1]) * third,
        ]
    }

    /// Full local frame of a fracture cell. Requires a mesh that passed
    /// validation (wall traces resolved, one triangle per wall).
    pub fn fracture_frame(&self, cell: usize) -> Result<FractureFrame<T>, MeshError> {
        let fc = self
            .fractures
            .get(cell)
            .ok_or(MeshError::UnknownCell { id: cell })?;
        let trace = self.wall_traces[cell].ok_or_else(|| {
            MeshError::Geometry(format!("fracture cell {cell} walls do not match its nodes"))
        })?;
        let a = self.fracture_nodes[fc.nodes[0]];
        let b = self.fracture_nodes[fc.nodes[1]];
        let dx = b[0] - a[0];
        let dy = b[1] - a[1];
        let length = (dx * dx + dy * dy).sqrt();
        if length.is_zero() {
            return Err(MeshError::Geometry(format!("fracture cell {cell} has zero length")));
        }
        let owner = |wall: [usize; 2]| -> Result<usize, MeshError> {
            let f = self.face_id(wall[0], wall[1]).ok_or_else(|| {
                MeshError::Geometry(format!("fracture cell {cell} wall is not a matrix face"))
            })?;
            Ok(self.face_triangles[f].0)
        };
        Ok(FractureFrame {
            length,
            tangent: [dx / length, dy / length],
            normal: fc.normal,
            plus_trace: trace.plus,
            minus_trace: trace.minus,
            plus_triangle: owner(trace.plus)?,
            minus_triangle: owner(trace.minus)?,
        })
    }

    /// Checks every documented invariant; an empty list means the mesh is
    /// valid. Violations are data, not errors, so broken meshes can be
    /// reported in full.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let tol = T::of(1e-12);

        for (i, tri) in self.triangles.iter().enumerate() {
            let area = triangle_area_of(&self.nodes, *tri);
            if !(area > T::zero()) {
                out.push(Violation {
                    invariant: "triangle must have positive area (counterclockwise)".into(),
                    entity: format!("triangle {i}"),
                });
            }
        }

        let trace_faces = self.wall_face_set();
        for (i, cell) in self.fractures.iter().enumerate() {
            let entity = format!("fracture cell {i}");
            if !(cell.cross_section > T::zero()) {
                out.push(Violation {
                    invariant: "fracture cross-section must be positive".into(),
                    entity: entity.clone(),
                });
            }
            let nrm = (cell.normal[0] * cell.normal[0] + cell.normal[1] * cell.normal[1]).sqrt();
            if (nrm - T::one()).abs() > tol {
                out.push(Violation {
                    invariant: "fracture normal must be unit length".into(),
                    entity: entity.clone(),
                });
            }
            let a = self.fracture_nodes[cell.nodes[0]];
            let b = self.fracture_nodes[cell.nodes[1]];
            let dx = b[0] - a[0];
            let dy = b[1] - a[1];
            let length = (dx * dx + dy * dy).sqrt();
            if length.is_zero() {
                out.push(Violation {
                    invariant: "fracture cell must have positive length".into(),
                    entity: entity.clone(),
                });
                continue;
            }
            if (cell.normal[0] * dx + cell.normal[1] * dy).abs() > tol * length {
                out.push(Violation {
                    invariant: "fracture normal must be perpendicular to the cell".into(),
                    entity: entity.clone(),
                });
            }
            match self.wall_traces[i] {
                None => out.push(Violation {
                    invariant: "fracture walls must coincide with the cell's nodes".into(),
                    entity: entity.clone(),
                }),
                Some(trace) => {
                    if trace.plus == trace.minus {
                        out.push(Violation {
                            invariant: "fracture walls must be distinct node pairs".into(),
                            entity: entity.clone(),
                        });
                    }
                    for (side, wall) in [("+", trace.plus), ("−", trace.minus)] {
                        match self.face_id(wall[0], wall[1]) {
                            None => out.push(Violation {
                                invariant: "fracture wall must be a matrix face".into(),
                                entity: format!("{entity}, {side} wall"),
                            }),
                            Some(f) => {
                                if self.face_triangles[f].1.is_some() {
                                    out.push(Violation {
                                        invariant:
                                            "fracture wall must belong to exactly one triangle"
                                                .into(),
                                        entity: format!("{entity}, {side} wall"),
                                    });
                                }
                            }
                        }
                    }
                    // + wall on the side the normal points into
                    if let (Some(fp), true) = (
                        self.face_id(trace.plus[0], trace.plus[1]),
                        trace.plus != trace.minus,
                    ) {
                        let t = self.face_triangles[fp].0;
                        if t != usize::MAX {
                            let c = self.triangle_centroid(t);
                            let mid = [
                                (a[0] + b[0]) * T::of(0.5),
                                (a[1] + b[1]) * T::of(0.5),
                            ];
                            let side = (c[0] - mid[0]) * cell.normal[0]
                                + (c[1] - mid[1]) * cell.normal[1];
                            if !(side > T::zero()) {
                                out.push(Violation {
                                    invariant: "+ wall must lie on the normal side".into(),
                                    entity: entity.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }

        // every one-triangle face is either a fracture wall or a tagged
        // boundary facet, exactly once
        let mut tagged = vec![0usize; self.faces.len()];
        for (i, facet) in self.boundary_facets.iter().enumerate() {
            match self.face_id(facet.nodes[0], facet.nodes[1]) {
                None => out.push(Violation {
                    invariant: "boundary facet must be a matrix face".into(),
                    entity: format!("boundary facet {i}"),
                }),
                Some(f) => {
                    tagged[f] += 1;
                    if self.face_triangles[f].1.is_some() {
                        out.push(Violation {
                            invariant: "boundary facet must lie on the boundary".into(),
                            entity: format!("boundary facet {i}"),
                        });
                    }
                    if trace_faces.contains(&f) {
                        out.push(Violation {
                            invariant: "fracture walls must not be tagged as boundary".into(),
                            entity: format!("boundary facet {i}"),
                        });
                    }
                }
            }
        }
        for (f, &pair) in self.faces.iter().enumerate() {
            let on_boundary = self.face_triangles[f].1.is_none();
            if on_boundary && !trace_faces.contains(&f) && tagged[f] != 1 {
                out.push(Violation {
                    invariant: "boundary face must carry exactly one tag".into(),
                    entity: format!("face {f} (nodes {} {})", pair[0], pair[1]),
                });
            }
        }
        out
    }
}

fn triangle_area_of<T: Real>(nodes: &[[T; 2]], tri: [usize; 3]) -> T {
    let [a, b, c] = tri;
    let half = T::of(0.5);
    ((nodes[b][0] - nodes[a][0]) * (nodes[c][1] - nodes[a][1])
        - (nodes[c][0] - nodes[a][0]) * (nodes[b][1] - nodes[a][1]))
        * half
}
