//! Time-dependent load vectors and essential boundary values.
//!
//! The mechanical load combines body forces, boundary tractions and the
//! initial-stress term; staged stress release keeps the initial traction
//! σ₀·n on a facet until the excavation front passes its midpoint, modelling
//! the removal of rock support. The flux load carries the natural pressure
//! conditions with a sign fixed by the face orientation convention, so a
//! constant prescribed head and zero flux solve the steady problem exactly.

use super::dofs::resolve_tags;
use super::flow::{face_of, face_sign_in_triangle};
use super::mechanics::prestress_vector;
use super::{AssemblyError, DofMap, HmParameters};
use crate::mesh::{BoundaryTag, FlowBc, MechBc, MixedDimMesh};
use crate::Real;

/// Values of the eliminated unknowns at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValues<T> {
    /// (displacement dof, prescribed value)
    pub displacement: Vec<(usize, T)>,
    /// (flux dof, prescribed total face flux in the global orientation)
    pub flux: Vec<(usize, T)>,
}

pub(crate) struct FacetGeometry<T> {
    pub face: usize,
    /// +1 when the face's global direction points out of the domain
    pub sign: T,
    pub length: T,
    pub midpoint: [T; 2],
    pub outward: [T; 2],
}

pub(crate) fn facet_geometry<T: Real>(
    mesh: &MixedDimMesh<T>,
    facet: usize,
) -> Result<FacetGeometry<T>, AssemblyError> {
    let nodes = mesh.boundary_facets[facet].nodes;
    let face = face_of(mesh, nodes)?;
    let (triangle, _) = mesh.face_triangles(face);
    let sign = face_sign_in_triangle(mesh, triangle, nodes)
        .expect("the owning triangle contains the facet");
    let a = mesh.nodes[nodes[0]];
    let b = mesh.nodes[nodes[1]];
    let edge = [b[0] - a[0], b[1] - a[1]];
    let length = (edge[0] * edge[0] + edge[1] * edge[1]).sqrt();
    // rotate the sorted-pair direction counterclockwise, then flip outward
    let (lo, hi) = (nodes[0].min(nodes[1]), nodes[0].max(nodes[1]));
    let d = [mesh.nodes[hi][0] - mesh.nodes[lo][0], mesh.nodes[hi][1] - mesh.nodes[lo][1]];
    let sign_t = T::of(sign as f64);
    let outward = [-d[1] / length * sign_t, d[0] / length * sign_t];
    Ok(FacetGeometry {
        face,
        sign: sign_t,
        length,
        midpoint: [(a[0] + b[0]) * T::of(0.5), (a[1] + b[1]) * T::of(0.5)],
        outward,
    })
}

/// Assembles the mechanical, source and flux load vectors at the given time.
pub fn assemble_rhs<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    params: &HmParameters<T>,
    tags: &[BoundaryTag<T>],
    time: T,
) -> Result<(Vec<T>, Vec<T>, Vec<T>), AssemblyError> {
    params.validate()?;
    let defs = resolve_tags(mesh, tags)?;
    let half = T::of(0.5);
    let third = T::of(1.0 / 3.0);

    let mut mech = prestress_vector(mesh, dofs, params)?;
    let body = params.body_force;
    if body.iter().any(|v| !v.is_zero()) {
        for cell in 0..mesh.n_triangles() {
            let share = mesh.triangle_area(cell)? * third;
            for &node in &mesh.triangles[cell] {
                for c in 0..2 {
                    mech[dofs.matrix_displacement(node, c)] += share * body[c];
                }
            }
        }
        for (cell, fc) in mesh.fractures.iter().enumerate() {
            let share = fc.cross_section * mesh.fracture_frame(cell)?.length * half;
            for &node in &fc.nodes {
                for c in 0..2 {
                    mech[dofs.fracture_displacement(node, c)] += share * body[c];
                }
            }
        }
    }

    let s0 = params.initial_stress;
    let sigma0 = [[s0[0], s0[2]], [s0[2], s0[1]]];
    for (index, facet) in mesh.boundary_facets.iter().enumerate() {
        let traction: Option<[T; 2]> = match &defs[facet.tag].mech {
            MechBc::Dirichlet { .. } => None,
            MechBc::Traction(values) => {
                let geometry = facet_geometry(mesh, index)?;
                Some([
                    values[0].at(time, geometry.midpoint[0]),
                    values[1].at(time, geometry.midpoint[0]),
                ])
            }
            MechBc::StagedStressRelease { front_speed } => {
                let geometry = facet_geometry(mesh, index)?;
                let excavated = geometry.midpoint[0] < *front_speed * time;
                if excavated {
                    None
                } else {
                    // the rock ahead of the front still carries σ₀·n
                    Some([
                        sigma0[0][0] * geometry.outward[0] + sigma0[0][1] * geometry.outward[1],
                        sigma0[1][0] * geometry.outward[0] + sigma0[1][1] * geometry.outward[1],
                    ])
                }
            }
        };
        if let Some(t) = traction {
            if t.iter().any(|v| !v.is_zero()) {
                let geometry = facet_geometry(mesh, index)?;
                let share = geometry.length * half;
                for &node in &facet.nodes {
                    for c in 0..2 {
                        mech[dofs.matrix_displacement(node, c)] += share * t[c];
                    }
                }
            }
        }
    }

    let mut source = vec![T::zero(); dofs.n_pressure()];
    if !params.matrix_source.is_zero() {
        for cell in 0..mesh.n_triangles() {
            source[dofs.matrix_pressure(cell)] = params.matrix_source * mesh.triangle_area(cell)?;
        }
    }
    if !params.fracture_source.is_zero() {
        for (cell, fc) in mesh.fractures.iter().enumerate() {
            source[dofs.fracture_pressure(cell)] =
                params.fracture_source * fc.cross_section * mesh.fracture_frame(cell)?.length;
        }
    }

    let mut flux = vec![T::zero(); dofs.n_flux()];
    for (index, facet) in mesh.boundary_facets.iter().enumerate() {
        if let FlowBc::Dirichlet(value) = &defs[facet.tag].flow {
            let geometry = facet_geometry(mesh, index)?;
            let head = value.at(time, geometry.midpoint[0]);
            flux[dofs.face_flux(geometry.face)] -= geometry.sign * head;
        }
    }
    for bc in &dofs.endpoint_bcs {
        if let FlowBc::Dirichlet(value) = &defs[bc.tag].flow {
            flux[bc.dof] -= bc.sign * value.at(time, bc.position[0]);
        }
    }

    Ok((mech, source, flux))
}

/// Evaluates the eliminated displacement and flux unknowns at the given time.
pub fn boundary_values<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    tags: &[BoundaryTag<T>],
    time: T,
) -> Result<BoundaryValues<T>, AssemblyError> {
    let defs = resolve_tags(mesh, tags)?;
    let mut displacement = Vec::with_capacity(dofs.fixed_displacements.len());
    for fixed in &dofs.fixed_displacements {
        let MechBc::Dirichlet { values, .. } = &defs[fixed.tag].mech else {
            return Err(AssemblyError::InvalidParameters(format!(
                "tag {:?} no longer prescribes displacements",
                defs[fixed.tag].name
            )));
        };
        let value = values[fixed.component].at(time, fixed.position[0]);
        displacement.push((fixed.dof, value));
    }
    let mut flux = Vec::with_capacity(dofs.fixed_fluxes.len());
    for fixed in &dofs.fixed_fluxes {
        let facet = &mesh.boundary_facets[fixed.facet];
        let FlowBc::Neumann(value) = &defs[facet.tag].flow else {
            return Err(AssemblyError::InvalidParameters(format!(
                "tag {:?} no longer prescribes fluxes",
                defs[facet.tag].name
            )));
        };
        let geometry = facet_geometry(mesh, fixed.facet)?;
        let density = value.at(time, geometry.midpoint[0]);
        // outward density to total flux in the global orientation
        flux.push((fixed.dof, geometry.sign * density * geometry.length));
    }
    Ok(BoundaryValues { displacement, flux })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{
        basic_params, clamped_tag, dirichlet_tag, noflow_roller_tag, tag_with, traction_tag,
        unit_square,
    };
    use super::super::build_dofs;
    use super::*;
    use crate::mesh::{FractureSpec, TimeValue};

    #[test]
    fn quiet_configurations_produce_zero_loads() {
        let mesh = unit_square(vec![], 3);
        let dofs = build_dofs(&mesh, &[traction_tag("wall")]).unwrap();
        let (mech, source, flux) =
            assemble_rhs(&mesh, &dofs, &basic_params(), &[traction_tag("wall")], 1.0).unwrap();
        assert!(mech.iter().all(|v| *v == 0.0));
        assert!(source.iter().all(|v| *v == 0.0));
        assert!(flux.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn tractions_spread_half_the_facet_length_to_each_node() {
        let mesh = unit_square(vec![], 2);
        let tag = tag_with(
            "wall",
            crate::mesh::FlowBc::Neumann(TimeValue::Constant(0.0)),
            crate::mesh::MechBc::Traction([
                TimeValue::Constant(2.0),
                TimeValue::Ramp { start: 0.0, end: 6.0, ramp_time: 2.0 },
            ]),
        );
        let dofs = build_dofs(&mesh, &[tag.clone()]).unwrap();
        let (mech, _, _) = assemble_rhs(&mesh, &dofs, &basic_params(), &[tag], 1.0).unwrap();
        // every boundary node, corners included, touches two facets of
        // length 1/2 and collects l/2 from each; the ramp is halfway to 6
        // at t = 1
        for (node, p) in mesh.nodes.iter().enumerate() {
            let on_boundary = p[0] < 1e-9 || p[0] > 1.0 - 1e-9 || p[1] < 1e-9 || p[1] > 1.0 - 1e-9;
            let weight = if on_boundary { 0.5 } else { 0.0 };
            assert!((mech[2 * node] - 2.0 * weight).abs() < 1e-14);
            assert!((mech[2 * node + 1] - 3.0 * weight).abs() < 1e-14);
        }
    }

    #[test]
    fn prescribed_head_loads_the_boundary_faces_with_the_signed_value() {
        let mesh = unit_square(vec![], 2);
        let tag = dirichlet_tag("wall", 300.0);
        let dofs = build_dofs(&mesh, &[tag.clone()]).unwrap();
        let (_, _, flux) = assemble_rhs(&mesh, &dofs, &basic_params(), &[tag], 0.0).unwrap();
        for index in 0..mesh.boundary_facets.len() {
            let geometry = facet_geometry(&mesh, index).unwrap();
            let expected = -geometry.sign * 300.0;
            assert_eq!(flux[geometry.face], expected, "facet {index}");
        }
        let touched = flux.iter().filter(|v| **v != 0.0).count();
        assert_eq!(touched, mesh.boundary_facets.len());
    }

    #[test]
    fn fracture_endpoints_inherit_the_boundary_head() {
        let mesh = unit_square(
            vec![FractureSpec { start: [0.5, 0.0], end: [0.5, 0.5], cross_section: 1e-4 }],
            4,
        );
        let tag = dirichlet_tag("wall", 250.0);
        let dofs = build_dofs(&mesh, &[tag.clone()]).unwrap();
        assert_eq!(dofs.endpoint_bcs.len(), 1);
        let (_, _, flux) = assemble_rhs(&mesh, &dofs, &basic_params(), &[tag], 0.0).unwrap();
        let bc = &dofs.endpoint_bcs[0];
        assert_eq!(flux[bc.dof], -bc.sign * 250.0);
    }

    #[test]
    fn staged_release_drops_the_initial_traction_behind_the_front() {
        let mesh = unit_square(vec![], 4);
        let tag = tag_with(
            "wall",
            crate::mesh::FlowBc::Neumann(TimeValue::Constant(0.0)),
            crate::mesh::MechBc::StagedStressRelease { front_speed: 1.0 },
        );
        let mut params = basic_params();
        params.initial_stress = [-60.0, -11.0, 0.0];
        let dofs = build_dofs(&mesh, &[tag.clone()]).unwrap();

        // before the front starts every facet still carries σ₀·n, which
        // balances the prestress volume term exactly
        let (mech, _, _) = assemble_rhs(&mesh, &dofs, &params, &[tag.clone()], 0.0).unwrap();
        assert!(mech.iter().all(|v| v.abs() < 1e-12));

        // once the front passed x = 0.5, facets on the left are unloaded
        let (mech, _, _) = assemble_rhs(&mesh, &dofs, &params, &[tag], 0.5001).unwrap();
        let node_at = |x: f64, y: f64| {
            mesh.nodes
                .iter()
                .position(|p| (p[0] - x).abs() < 1e-9 && (p[1] - y).abs() < 1e-9)
                .unwrap()
        };
        // unloading removes t = σ₀·(0,−1) = (0, 11) from both facets at the
        // node, leaving the bare prestress term, which was its negative
        let unloaded = node_at(0.25, 0.0);
        assert!(mech[2 * unloaded].abs() < 1e-12);
        assert!((mech[2 * unloaded + 1] + 11.0 * 0.25).abs() < 1e-12);
        // facets right of the front still balance
        let loaded = node_at(0.75, 0.0);
        assert!(mech[2 * loaded].abs() < 1e-12);
        assert!(mech[2 * loaded + 1].abs() < 1e-12);
    }

    #[test]
    fn boundary_values_follow_their_schedules() {
        let mesh = unit_square(vec![], 2);
        let roller = noflow_roller_tag("wall");
        let dofs = build_dofs(&mesh, &[roller.clone()]).unwrap();
        let values = boundary_values(&mesh, &dofs, &[roller], 1.0).unwrap();
        assert_eq!(values.displacement.len(), dofs.fixed_displacements.len());
        assert!(values.displacement.iter().all(|&(_, v)| v == 0.0));
        assert!(values.flux.iter().all(|&(_, v)| v == 0.0));

        // an inflow density of 2 over a facet of length 1/2 gives total
        // flux 1, signed by the face orientation
        let inflow = tag_with(
            "wall",
            crate::mesh::FlowBc::Neumann(TimeValue::Constant(2.0)),
            crate::mesh::MechBc::Traction([TimeValue::Constant(0.0), TimeValue::Constant(0.0)]),
        );
        let dofs = build_dofs(&mesh, &[inflow.clone()]).unwrap();
        let values = boundary_values(&mesh, &dofs, &[inflow], 0.0).unwrap();
        assert_eq!(values.flux.len(), mesh.boundary_facets.len());
        for &(dof, value) in &values.flux {
            let facet = dofs.fixed_fluxes.iter().find(|f| f.dof == dof).unwrap().facet;
            let geometry = facet_geometry(&mesh, facet).unwrap();
            assert_eq!(value, geometry.sign * 2.0 * 0.5);
        }
    }

    #[test]
    fn sources_scale_with_cell_measures() {
        let mesh = unit_square(
            vec![FractureSpec { start: [0.25, 0.5], end: [0.75, 0.5], cross_section: 1e-4 }],
            4,
        );
        let tag = clamped_tag("wall");
        let dofs = build_dofs(&mesh, &[tag.clone()]).unwrap();
        let mut params = basic_params();
        params.matrix_source = 2.0;
        params.fracture_source = 5.0;
        let (_, source, _) = assemble_rhs(&mesh, &dofs, &params, &[tag], 0.0).unwrap();
        for cell in 0..mesh.n_triangles() {
            let expected = 2.0 * mesh.triangle_area(cell).unwrap();
            assert!((source[dofs.matrix_pressure(cell)] - expected).abs() < 1e-15);
        }
        for cell in 0..mesh.n_fractures() {
            let expected = 5.0 * 1e-4 * 0.25;
            assert!((source[dofs.fracture_pressure(cell)] - expected).abs() < 1e-18);
        }
    }
}
