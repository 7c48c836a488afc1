//! Elasticity and pressure–displacement coupling forms.
//!
//! Matrix triangles carry the standard plane-strain P1 stiffness. A fracture
//! cell adds a twelve-unknown block tying its two mid-line nodes to the four
//! wall trace nodes: the displacement is reconstructed linearly across each
//! half of the cross-section, giving one approximate strain per side with a
//! tangential stretch part and a transversal part scaled by 2/δ. The block is
//! integrated with two Gauss points along the cell and weighted by δ, so it
//! penalizes wall-midline deviation at O(1/δ) and keeps the operator elliptic
//! even though fracture nodes never touch the boundary.

use super::{lame, triangle_frame, AssemblyError, DofMap, HmParameters};
use crate::linalg::{SparseBuilder, SparseMatrix};
use crate::mesh::MixedDimMesh;
use crate::Real;

/// Symmetric 2×2 tensor as (xx, yy, xy).
type Sym<T> = [T; 3];

fn sym_outer<T: Real>(component: usize, v: [T; 2]) -> Sym<T> {
    let half = T::of(0.5);
    if component == 0 {
        [v[0], T::zero(), v[1] * half]
    } else {
        [T::zero(), v[1], v[0] * half]
    }
}

fn contract<T: Real>(a: Sym<T>, b: Sym<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + T::of(2.0) * a[2] * b[2]
}

fn trace<T: Real>(a: Sym<T>) -> T {
    a[0] + a[1]
}

/// Per-side strains of the twelve local fracture unknowns at one quadrature
/// point. Unknown order: mid-line node a, node b (x then y), then the + wall
/// trace pair, then the − wall trace pair.
fn fracture_strains<T: Real>(
    tangent: [T; 2],
    normal: [T; 2],
    length: T,
    cross_section: T,
    point: T,
) -> [[Sym<T>; 12]; 2] {
    let shape = [T::one() - point, point];
    let dshape = [-T::one() / length, T::one() / length];
    let transversal = T::of(2.0) / cross_section;
    let mut eps = [[[T::zero(); 3]; 12]; 2];
    for (side, eps) in eps.iter_mut().enumerate() {
        let side_normal = if side == 0 {
            normal
        } else {
            [-normal[0], -normal[1]]
        };
        for end in 0..2 {
            for c in 0..2 {
                let scale = transversal * shape[end];
                let w = [
                    dshape[end] * tangent[0] - scale * side_normal[0],
                    dshape[end] * tangent[1] - scale * side_normal[1],
                ];
                eps[2 * end + c] = sym_outer(c, w);
                let trace_block = 4 + 4 * side + 2 * end + c;
                eps[trace_block] = sym_outer(c, [scale * side_normal[0], scale * side_normal[1]]);
            }
        }
    }
    eps
}

fn gauss2<T: Real>() -> [T; 2] {
    let offset = T::of(0.5) / T::of(3.0).sqrt();
    let half = T::of(0.5);
    [half - offset, half + offset]
}

fn fracture_globals<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    cell: usize,
) -> Result<([usize; 12], crate::mesh::FractureFrame<T>), AssemblyError> {
    let frame = mesh.fracture_frame(cell)?;
    let fc = &mesh.fractures[cell];
    let mut global = [0usize; 12];
    for end in 0..2 {
        for c in 0..2 {
            global[2 * end + c] = dofs.fracture_displacement(fc.nodes[end], c);
            global[4 + 2 * end + c] = dofs.matrix_displacement(frame.plus_trace[end], c);
            global[8 + 2 * end + c] = dofs.matrix_displacement(frame.minus_trace[end], c);
        }
    }
    Ok((global, frame))
}

/// The initial-stress load: entries −∫σ₀:ε(z) over matrix cells and
/// −∫⟨σ₀:ε̄(z)⟩ over fracture cells, so that a constant σ₀ balanced by the
/// matching boundary tractions leaves the body at rest.
pub(crate) fn prestress_vector<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    params: &HmParameters<T>,
) -> Result<Vec<T>, AssemblyError> {
    let mut load = vec![T::zero(); dofs.n_displacement()];
    let s0 = params.initial_stress;
    let sigma0: Sym<T> = [s0[0], s0[1], s0[2]];
    if sigma0.iter().all(|v| v.is_zero()) {
        return Ok(load);
    }
    for cell in 0..mesh.n_triangles() {
        let frame = triangle_frame(mesh, cell);
        for (i, &node) in mesh.triangles[cell].iter().enumerate() {
            for c in 0..2 {
                let row = dofs.matrix_displacement(node, c);
                load[row] =
                    load[row] - frame.area * contract(sigma0, sym_outer(c, frame.gradients[i]));
            }
        }
    }
    let half = T::of(0.5);
    for (cell, fc) in mesh.fractures.iter().enumerate() {
        let (global, frame) = fracture_globals(mesh, dofs, cell)?;
        let weight = frame.length * half * fc.cross_section;
        for point in gauss2::<T>() {
            let eps = fracture_strains(
                frame.tangent,
                frame.normal,
                frame.length,
                fc.cross_section,
                point,
            );
            for p in 0..12 {
                let mut work = T::zero();
                for side in 0..2 {
                    work += contract(sigma0, eps[side][p]);
                }
                load[global[p]] = load[global[p]] - weight * half * work;
            }
        }
    }
    Ok(load)
}

/// Assembles the elasticity matrix and the initial-stress load it induces,
/// i.e. the vector with entries −∫σ₀:ε(z) over matrix and fracture cells.
pub fn assemble_elasticity<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    params: &HmParameters<T>,
) -> Result<(SparseMatrix<T>, Vec<T>), AssemblyError> {
    params.validate()?;
    let n = dofs.n_displacement();
    let mut builder = SparseBuilder::new(n, n);
    let two = T::of(2.0);

    for cell in 0..mesh.n_triangles() {
        let region = params.region(mesh.triangle_regions[cell])?;
        let (lambda, mu) = lame(region.youngs_modulus, region.poisson_ratio);
        let frame = triangle_frame(mesh, cell);
        let g = frame.gradients;
        let area = frame.area;
        for i in 0..3 {
            let row_node = mesh.triangles[cell][i];
            for c in 0..2 {
                let row = dofs.matrix_displacement(row_node, c);
                for j in 0..3 {
                    let col_node = mesh.triangles[cell][j];
                    let dot = g[i][0] * g[j][0] + g[i][1] * g[j][1];
                    for d in 0..2 {
                        let kronecker = if c == d { T::one() } else { T::zero() };
                        let value = area
                            * (mu * (kronecker * dot + g[i][d] * g[j][c])
                                + lambda * g[i][c] * g[j][d]);
                        builder.add(row, dofs.matrix_displacement(col_node, d), value);
                    }
                }
            }
        }
    }

    let (lambda_f, mu_f) = lame(params.fracture.youngs_modulus, params.fracture.poisson_ratio);
    let half = T::of(0.5);
    for (cell, fc) in mesh.fractures.iter().enumerate() {
        let (global, frame) = fracture_globals(mesh, dofs, cell)?;
        let weight = frame.length * half * fc.cross_section;
        for point in gauss2::<T>() {
            let eps = fracture_strains(
                frame.tangent,
                frame.normal,
                frame.length,
                fc.cross_section,
                point,
            );
            for p in 0..12 {
                for q in 0..12 {
                    let mut value = T::zero();
                    for side in 0..2 {
                        value += two * mu_f * contract(eps[side][p], eps[side][q])
                            + lambda_f * trace(eps[side][p]) * trace(eps[side][q]);
                    }
                    builder.add(global[p], global[q], weight * half * value);
                }
            }
        }
    }

    Ok((builder.build(), prestress_vector(mesh, dofs, params)?))
}

/// Assembles the coupling form α∫(div u)q, pressure rows over displacement
/// columns. A fracture row measures the cell's volume change rate: the
/// tangential stretch of the mid-line weighted by δ plus the normal opening
/// rate of the walls, whose 1/δ and δ weights cancel.
pub fn assemble_coupling<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    params: &HmParameters<T>,
) -> Result<SparseMatrix<T>, AssemblyError> {
    params.validate()?;
    let mut builder = SparseBuilder::new(dofs.n_pressure(), dofs.n_displacement());

    for cell in 0..mesh.n_triangles() {
        let alpha = params.region(mesh.triangle_regions[cell])?.biot_coefficient;
        let frame = triangle_frame(mesh, cell);
        let row = dofs.matrix_pressure(cell);
        for i in 0..3 {
            for c in 0..2 {
                let col = dofs.matrix_displacement(mesh.triangles[cell][i], c);
                builder.add(row, col, alpha * frame.area * frame.gradients[i][c]);
            }
        }
    }

    let alpha_f = params.fracture.biot_coefficient;
    let half = T::of(0.5);
    for (cell, fc) in mesh.fractures.iter().enumerate() {
        let frame = mesh.fracture_frame(cell)?;
        let row = dofs.fracture_pressure(cell);
        let wall_weight = alpha_f * frame.length * half;
        for end in 0..2 {
            let stretch = if end == 0 { -T::one() } else { T::one() };
            for c in 0..2 {
                builder.add(
                    row,
                    dofs.fracture_displacement(fc.nodes[end], c),
                    alpha_f * fc.cross_section * stretch * frame.tangent[c],
                );
                builder.add(
                    row,
                    dofs.matrix_displacement(frame.plus_trace[end], c),
                    wall_weight * frame.normal[c],
                );
                builder.add(
                    row,
                    dofs.matrix_displacement(frame.minus_trace[end], c),
                    -wall_weight * frame.normal[c],
                );
            }
        }
    }

    Ok(builder.build())
}
