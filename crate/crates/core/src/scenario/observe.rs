//! Point probes extracting time series from simulation states.
//!
//! A probe is resolved against the mesh once: the containing triangle with
//! its barycentric weights, and the nearest fracture cell. Pressure is
//! piecewise constant, so the probe reports the containing cell's value;
//! displacement is interpolated linearly from the triangle's nodes. Times are
//! reported in days regardless of the scenario's native unit.

use crate::assembly::DofMap;
use crate::coupling::SimulationState;
use crate::mesh::MixedDimMesh;
use crate::Real;

use super::{ScenarioError, SECONDS_PER_DAY};

/// A named observation point resolved against a mesh.
#[derive(Debug, Clone)]
pub struct ObservationPoint<T> {
    pub id: String,
    pub position: [T; 2],
    triangle: usize,
    weights: [T; 3],
    nearest_fracture: Option<usize>,
}

impl<T: Real> ObservationPoint<T> {
    /// Finds the containing triangle (the lowest-index one when the point
    /// sits on a shared edge) and the nearest fracture cell.
    pub fn locate(
        id: impl Into<String>,
        position: [T; 2],
        mesh: &MixedDimMesh<T>,
    ) -> Result<Self, ScenarioError> {
        let id = id.into();
        let hit = (0..mesh.n_triangles())
            .filter_map(|t| barycentric(mesh, t, position).map(|w| (t, w)))
            .next()
            .ok_or_else(|| {
                ScenarioError::Config(format!(
                    "observation point `{id}` at ({}, {}) lies outside the mesh",
                    position[0], position[1]
                ))
            })?;
        let nearest_fracture = (0..mesh.fractures.len()).min_by(|&a, &b| {
            segment_distance(mesh, a, position)
                .partial_cmp(&segment_distance(mesh, b, position))
                .expect("finite distances")
        });
        Ok(ObservationPoint {
            id,
            position,
            triangle: hit.0,
            weights: hit.1,
            nearest_fracture,
        })
    }

    pub fn triangle(&self) -> usize {
        self.triangle
    }

    /// Samples one state. The aperture is 0 when the mesh has no fractures.
    pub fn record(
        &self,
        mesh: &MixedDimMesh<T>,
        dofs: &DofMap<T>,
        state: &SimulationState<T>,
    ) -> ObservationRecord<T> {
        let nodes = mesh.triangles[self.triangle];
        let mut displacement = [T::zero(); 2];
        for (corner, &node) in nodes.iter().enumerate() {
            for (component, value) in displacement.iter_mut().enumerate() {
                *value = *value
                    + self.weights[corner]
                        * state.displacement[dofs.matrix_displacement(node, component)];
            }
        }
        ObservationRecord {
            time_days: state.time / T::of(SECONDS_PER_DAY),
            point_id: self.id.clone(),
            pressure_head: state.pressure[dofs.matrix_pressure(self.triangle)],
            displacement,
            aperture: self
                .nearest_fracture
                .map_or(T::zero(), |f| state.fracture.apertures[f]),
        }
    }
}

/// One row of the observation time series.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRecord<T> {
    pub time_days: T,
    pub point_id: String,
    pub pressure_head: T,
    pub displacement: [T; 2],
    /// element-average aperture of the nearest fracture cell
    pub aperture: T,
}

impl<T: Real> ObservationRecord<T> {
    pub const CSV_HEADER: &'static str = "time_days,point_id,pressure_head,ux,uy,aperture";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{},{:e},{:e},{:e},{:e}",
            self.time_days,
            self.point_id,
            self.pressure_head,
            self.displacement[0],
            self.displacement[1],
            self.aperture
        )
    }
}

/// Barycentric weights of `p` in triangle `t`, or None when outside. The
/// tolerance admits points on edges, so probes on cell boundaries resolve to
/// the first triangle in index order.
fn barycentric<T: Real>(mesh: &MixedDimMesh<T>, t: usize, p: [T; 2]) -> Option<[T; 3]> {
    let [a, b, c] = mesh.triangles[t].map(|n| mesh.nodes[n]);
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let wb = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
    let wc = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
    let wa = T::one() - wb - wc;
    let tol = T::of(-1e-9);
    (wa >= tol && wb >= tol && wc >= tol).then_some([wa, wb, wc])
}

fn segment_distance<T: Real>(mesh: &MixedDimMesh<T>, cell: usize, p: [T; 2]) -> T {
    let [a, b] = mesh.fractures[cell].nodes.map(|n| mesh.fracture_nodes[n]);
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let along = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy);
    let s = along.max(T::zero()).min(T::one());
    let qx = a[0] + s * dx - p[0];
    let qy = a[1] + s * dy - p[1];
    (qx * qx + qy * qy).sqrt()
}
