//! Legacy ASCII VTK output of one simulation state.
//!
//! The unstructured grid holds the matrix triangles followed by the fracture
//! segments (on their own duplicated nodes), so cell arrays concatenate the
//! matrix and fracture values in dof order. Floats are printed with 17
//! significant digits, which round-trips f64 exactly and keeps the files
//! byte-for-byte reproducible.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::assembly::{DofMap, HmParameters};
use crate::coupling::SimulationState;
use crate::mesh::MixedDimMesh;
use crate::Real;

use super::ScenarioError;

/// Writes pressure, aperture, conductivity and contact flags per cell and the
/// displacement vector per point.
pub fn write_fields<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    params: &HmParameters<T>,
    state: &SimulationState<T>,
    path: impl AsRef<Path>,
) -> Result<(), ScenarioError> {
    let mut out = BufWriter::new(File::create(path)?);
    let n_points = mesh.n_nodes() + mesh.fracture_nodes.len();
    let n_cells = mesh.n_triangles() + mesh.n_fractures();

    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "step {} time {:e}", state.step, state.time)?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(out, "POINTS {n_points} double")?;
    for p in mesh.nodes.iter().chain(mesh.fracture_nodes.iter()) {
        writeln!(out, "{:.17e} {:.17e} 0.0", p[0], p[1])?;
    }

    writeln!(out, "CELLS {n_cells} {}", 4 * mesh.n_triangles() + 3 * mesh.n_fractures())?;
    for tri in &mesh.triangles {
        writeln!(out, "3 {} {} {}", tri[0], tri[1], tri[2])?;
    }
    for cell in &mesh.fractures {
        writeln!(
            out,
            "2 {} {}",
            mesh.n_nodes() + cell.nodes[0],
            mesh.n_nodes() + cell.nodes[1]
        )?;
    }
    writeln!(out, "CELL_TYPES {n_cells}")?;
    for _ in 0..mesh.n_triangles() {
        writeln!(out, "5")?;
    }
    for _ in 0..mesh.n_fractures() {
        writeln!(out, "3")?;
    }

    writeln!(out, "CELL_DATA {n_cells}")?;
    scalars(&mut out, "pressure", (0..n_cells).map(|c| state.pressure[c]))?;
    scalars(
        &mut out,
        "aperture",
        (0..mesh.n_triangles())
            .map(|_| T::zero())
            .chain(state.fracture.apertures.iter().copied()),
    )?;
    scalars(
        &mut out,
        "conductivity",
        (0..mesh.n_triangles())
            .map(|t| match &params.conductivity_override {
                Some(values) => values[t],
                None => params.regions[mesh.triangle_regions[t]].conductivity,
            })
            .chain(state.fracture.conductivities.iter().copied()),
    )?;
    writeln!(out, "SCALARS contact_active int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for _ in 0..mesh.n_triangles() {
        writeln!(out, "0")?;
    }
    for &active in &state.fracture.contact_active {
        writeln!(out, "{}", active as u8)?;
    }

    writeln!(out, "POINT_DATA {n_points}")?;
    writeln!(out, "VECTORS displacement double")?;
    for node in 0..mesh.n_nodes() {
        writeln!(
            out,
            "{:.17e} {:.17e} 0.0",
            state.displacement[dofs.matrix_displacement(node, 0)],
            state.displacement[dofs.matrix_displacement(node, 1)]
        )?;
    }
    for node in 0..mesh.fracture_nodes.len() {
        writeln!(
            out,
            "{:.17e} {:.17e} 0.0",
            state.displacement[dofs.fracture_displacement(node, 0)],
            state.displacement[dofs.fracture_displacement(node, 1)]
        )?;
    }
    out.flush()?;
    Ok(())
}

fn scalars<T: Real>(
    out: &mut impl Write,
    name: &str,
    values: impl Iterator<Item = T>,
) -> Result<(), ScenarioError> {
    writeln!(out, "SCALARS {name} double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for value in values {
        writeln!(out, "{value:.17e}")?;
    }
    Ok(())
}
