//! Linearized non-penetration constraints on the fracture walls.
//!
//! One row per fracture cell: the averaged normal closing of the walls must
//! not exceed the gap between the reference cross-section and the minimal
//! one. Row times displacement equals δ_min − a_f(u) + c, so the slack
//! c − B_I u is exactly the cell's margin above the minimal aperture and the
//! multiplier of the dual problem is the contact pressure on the cell.

use super::{AssemblyError, DofMap, HmParameters};
use crate::linalg::{SparseBuilder, SparseMatrix};
use crate::mesh::MixedDimMesh;
use crate::Real;

#[derive(Debug, Clone)]
pub struct ContactConstraints<T> {
    /// constraint rows over all displacement unknowns
    pub matrix: SparseMatrix<T>,
    /// row upper bounds, the rest margins δ − δ_min
    pub bounds: Vec<T>,
}

pub fn assemble_contact<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    params: &HmParameters<T>,
) -> Result<ContactConstraints<T>, AssemblyError> {
    params.validate()?;
    let quarter = T::of(0.25);
    let mut builder = SparseBuilder::new(mesh.n_fractures(), dofs.n_displacement());
    let mut bounds = Vec::with_capacity(mesh.n_fractures());
    for (cell, fc) in mesh.fractures.iter().enumerate() {
        let margin = fc.cross_section - params.fracture.min_cross_section;
        if margin < T::zero() {
            return Err(AssemblyError::InfeasibleRest { cell });
        }
        bounds.push(margin);
        let frame = mesh.fracture_frame(cell)?;
        for end in 0..2 {
            for c in 0..2 {
                builder.add(
                    cell,
                    dofs.matrix_displacement(frame.plus_trace[end], c),
                    -quarter * frame.normal[c],
                );
                builder.add(
                    cell,
                    dofs.matrix_displacement(frame.minus_trace[end], c),
                    quarter * frame.normal[c],
                );
            }
        }
    }
    Ok(ContactConstraints { matrix: builder.build(), bounds })
}
