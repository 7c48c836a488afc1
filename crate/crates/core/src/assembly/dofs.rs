//! Degree-of-freedom numbering and essential boundary structure.
//!
//! Displacements: matrix nodes then fracture nodes, xy-interleaved.
//! Pressures: triangles then fracture cells. Fluxes: one RT0 unknown per
//! matrix face (wall faces double as the exchange fluxes of their fracture
//! cell), then nodal tangential discharges of the fracture network.
//!
//! At each fracture node the local end values of the incident cells satisfy
//! Kirchhoff's law; the node contributes (valence − 1) free through-flow
//! unknowns and each cell end carries a short linear expansion in them. Tips
//! and no-flow boundary endpoints expand to nothing (zero discharge), while a
//! pressure-Dirichlet boundary endpoint keeps its single end value free so
//! the fracture can drain through the boundary.

use super::AssemblyError;
use crate::mesh::{BoundaryTag, FlowBc, MechBc, MixedDimMesh};
use crate::Real;

/// One eliminated displacement component on a boundary node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedDisplacement<T> {
    pub dof: usize,
    /// mesh tag index supplying the value
    pub tag: usize,
    pub component: usize,
    /// node position; its first coordinate is the staging coordinate
    pub position: [T; 2],
}

/// One eliminated RT0 face unknown on a prescribed-flux boundary facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedFlux {
    pub dof: usize,
    /// index into the mesh boundary facet list
    pub facet: usize,
}

/// Linear expansion of a cell-end discharge value in global flux DOFs.
pub type DischargeExpansion<T> = Vec<(usize, T)>;

/// A fracture endpoint draining through a pressure-Dirichlet boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointBc<T> {
    pub dof: usize,
    /// outflow sign of the end (−1 at the first cell node, +1 at the second)
    pub sign: T,
    pub tag: usize,
    pub position: [T; 2],
}

#[derive(Debug, Clone)]
pub struct DofMap<T> {
    n_matrix_nodes: usize,
    n_fracture_nodes: usize,
    n_triangles: usize,
    n_fracture_cells: usize,
    n_faces: usize,
    n_tangential: usize,
    pub fixed_displacements: Vec<FixedDisplacement<T>>,
    pub fixed_fluxes: Vec<FixedFlux>,
    /// per fracture cell, per end: expansion of the end discharge
    pub discharges: Vec<[DischargeExpansion<T>; 2]>,
    pub endpoint_bcs: Vec<EndpointBc<T>>,
}

impl<T: Real> DofMap<T> {
    pub fn matrix_displacement(&self, node: usize, component: usize) -> usize {
        2 * node + component
    }

    pub fn fracture_displacement(&self, node: usize, component: usize) -> usize {
        2 * (self.n_matrix_nodes + node) + component
    }

    pub fn n_displacement(&self) -> usize {
        2 * (self.n_matrix_nodes + self.n_fracture_nodes)
    }

    pub fn matrix_pressure(&self, cell: usize) -> usize {
        cell
    }

    pub fn fracture_pressure(&self, cell: usize) -> usize {
        self.n_triangles + cell
    }

    pub fn n_pressure(&self) -> usize {
        self.n_triangles + self.n_fracture_cells
    }

    /// RT0 unknown of a matrix face; wall faces are the exchange fluxes.
    pub fn face_flux(&self, face: usize) -> usize {
        face
    }

    pub fn n_flux(&self) -> usize {
        self.n_faces + self.n_tangential
    }

    pub fn n_tangential(&self) -> usize {
        self.n_tangential
    }

    pub fn n_exchange(&self) -> usize {
        2 * self.n_fracture_cells
    }
}

/// Resolves the mesh's tag names against the given definitions, in tag order.
pub(crate) fn resolve_tags<'t, T>(
    mesh: &MixedDimMesh<T>,
    tags: &'t [BoundaryTag<T>],
) -> Result<Vec<&'t BoundaryTag<T>>, AssemblyError> {
    mesh.tag_names
        .iter()
        .map(|name| {
            tags.iter()
                .find(|tag| &tag.name == name)
                .ok_or_else(|| AssemblyError::UnknownTag { name: name.clone() })
        })
        .collect()
}

/// Picks the boundary facet whose tag a fracture endpoint inherits: the
/// longest facet touching one of its coincident matrix nodes, ties broken by
/// the smaller face id.
pub(crate) fn inherited_facet<T: Real>(
    mesh: &MixedDimMesh<T>,
    fracture_node: usize,
) -> Option<usize> {
    let coincident = mesh.matrix_nodes_at(fracture_node);
    let mut best: Option<(T, usize, usize)> = None;
    for (i, facet) in mesh.boundary_facets.iter().enumerate() {
        if !facet.nodes.iter().any(|n| coincident.contains(n)) {
            continue;
        }
        let a = mesh.nodes[facet.nodes[0]];
        let b = mesh.nodes[facet.nodes[1]];
        let length =
            ((b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1])).sqrt();
        let face = mesh
            .face_id(facet.nodes[0], facet.nodes[1])
            .expect("boundary facets are faces in a valid mesh");
        let better = match best {
            None => true,
            Some((len, id, _)) => length > len || (length == len && face < id),
        };
        if better {
            best = Some((length, face, i));
        }
    }
    best.map(|(_, _, facet)| facet)
}

pub fn build_dofs<T: Real>(
    mesh: &MixedDimMesh<T>,
    tags: &[BoundaryTag<T>],
) -> Result<DofMap<T>, AssemblyError> {
    let defs = resolve_tags(mesh, tags)?;

    let mut fixed_displacements = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for facet in &mesh.boundary_facets {
        let MechBc::Dirichlet { fixed, .. } = defs[facet.tag].mech else { continue };
        for &node in &facet.nodes {
            for (component, &is_fixed) in fixed.iter().enumerate() {
                // the first facet in file order wins at shared corners
                if is_fixed && seen.insert((node, component)) {
                    fixed_displacements.push(FixedDisplacement {
                        dof: 2 * node + component,
                        tag: facet.tag,
                        component,
                        position: mesh.nodes[node],
                    });
                }
            }
        }
    }
    fixed_displacements.sort_by_key(|f| f.dof);

    let mut fixed_fluxes = Vec::new();
    for (i, facet) in mesh.boundary_facets.iter().enumerate() {
        if matches!(defs[facet.tag].flow, FlowBc::Neumann(_)) {
            let dof = mesh
                .face_id(facet.nodes[0], facet.nodes[1])
                .expect("boundary facets are faces in a valid mesh");
            fixed_fluxes.push(FixedFlux { dof, facet: i });
        }
    }
    fixed_fluxes.sort_by_key(|f| f.dof);

    // tangential discharge unknowns, node by node
    let n_faces = mesh.faces().len();
    let mut discharges: Vec<[DischargeExpansion<T>; 2]> =
        vec![[Vec::new(), Vec::new()]; mesh.n_fractures()];
    let mut endpoint_bcs = Vec::new();
    let mut next_dof = n_faces;
    for node in 0..mesh.fracture_nodes.len() {
        let mut ends: Vec<(usize, usize)> = Vec::new();
        for (cell, fc) in mesh.fractures.iter().enumerate() {
            for end in 0..2 {
                if fc.nodes[end] == node {
                    ends.push((cell, end));
                }
            }
        }
        let sign = |end: usize| if end == 0 { -T::one() } else { T::one() };
        match ends.len() {
            0 => {}
            1 => {
                let (cell, end) = ends[0];
                if mesh.boundary_endpoints().contains(&node) {
                    let facet = inherited_facet(mesh, node)
                        .expect("boundary endpoints touch a boundary facet");
                    let tag = mesh.boundary_facets[facet].tag;
                    if matches!(defs[tag].flow, FlowBc::Dirichlet(_)) {
                        let dof = next_dof;
                        next_dof += 1;
                        discharges[cell][end].push((dof, T::one()));
                        endpoint_bcs.push(EndpointBc {
                            dof,
                            sign: sign(end),
                            tag,
                            position: mesh.fracture_nodes[node],
                        });
                    }
                    // a no-flow boundary seals the endpoint, like a tip
                }
            }
            valence => {
                // Kirchhoff: end values s_i·(t_i − t_{i−1}) with t_0 = t_v = 0
                let base = next_dof;
                next_dof += valence - 1;
                for (i, &(cell, end)) in ends.iter().enumerate() {
                    let s = sign(end);
                    if i > 0 {
                        discharges[cell][end].push((base + i - 1, -s));
                    }
                    if i < valence - 1 {
                        discharges[cell][end].push((base + i, s));
                    }
                }
            }
        }
    }

    Ok(DofMap {
        n_matrix_nodes: mesh.n_nodes(),
        n_fracture_nodes: mesh.fracture_nodes.len(),
        n_triangles: mesh.n_triangles(),
        n_fracture_cells: mesh.n_fractures(),
        n_faces,
        n_tangential: next_dof - n_faces,
        fixed_displacements,
        fixed_fluxes,
        discharges,
        endpoint_bcs,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{dirichlet_tag, noflow_roller_tag, traction_tag};
    use super::*;
    use crate::mesh::{generate_rect_dfm, FractureSpec, RectDfmSpec};

    fn square_with(fractures: Vec<FractureSpec<f64>>) -> MixedDimMesh<f64> {
        let spec = RectDfmSpec {
            extents: [[0.0, 0.0], [1.0, 1.0]],
            cells: [4, 4],
            fractures,
            cutouts: vec![],
            seed: 5,
        };
        generate_rect_dfm(&spec, |_, _| "wall".into()).unwrap()
    }

    #[test]
    fn two_triangle_square_counts() {
        let mesh = crate::mesh::MixedDimMesh::<f64>::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![0, 0],
            vec![],
            vec![],
            vec![
                crate::mesh::BoundaryFacet { nodes: [0, 1], tag: 0 },
                crate::mesh::BoundaryFacet { nodes: [1, 2], tag: 0 },
                crate::mesh::BoundaryFacet { nodes: [2, 3], tag: 0 },
                crate::mesh::BoundaryFacet { nodes: [3, 0], tag: 0 },
            ],
            vec!["wall".into()],
        )
        .unwrap();
        let dofs = build_dofs(&mesh, &[traction_tag("wall")]).unwrap();
        assert_eq!(dofs.n_displacement(), 8);
        assert_eq!(dofs.n_pressure(), 2);
        assert_eq!(dofs.n_flux(), 5);
        assert!(dofs.fixed_displacements.is_empty());
        assert!(dofs.fixed_fluxes.is_empty());
    }

    #[test]
    fn fracture_cells_add_their_own_unknowns() {
        let mesh = square_with(vec![FractureSpec {
            start: [0.25, 0.5],
            end: [0.75, 0.5],
            cross_section: 1e-4,
        }]);
        let dofs = build_dofs(&mesh, &[traction_tag("wall")]).unwrap();
        // each fracture node carries a displacement pair
        assert_eq!(dofs.n_displacement(), 2 * 26 + 2 * 3);
        // one fracture pressure per cell
        assert_eq!(dofs.n_pressure(), 32 + 2);
        // two wall exchange fluxes per cell plus the shared through-flow
        // unknown at the interior node; tips carry no discharge
        assert_eq!(dofs.n_exchange(), 4);
        assert_eq!(dofs.n_tangential(), 1);
        assert_eq!(dofs.n_flux(), mesh.faces().len() + 1);
        let shared = dofs.n_flux() - 1;
        assert_eq!(dofs.discharges[0][0], vec![]);
        assert_eq!(dofs.discharges[0][1], vec![(shared, 1.0)]);
        assert_eq!(dofs.discharges[1][0], vec![(shared, 1.0)]);
        assert_eq!(dofs.discharges[1][1], vec![]);
    }

    #[test]
    fn junctions_get_valence_minus_one_unknowns() {
        let mesh = square_with(vec![
            FractureSpec { start: [0.25, 0.5], end: [0.75, 0.5], cross_section: 1e-4 },
            FractureSpec { start: [0.5, 0.25], end: [0.5, 0.75], cross_section: 1e-4 },
        ]);
        let dofs = build_dofs(&mesh, &[traction_tag("wall")]).unwrap();
        assert_eq!(dofs.n_tangential(), 3);
        // Kirchhoff holds for any through-flow values: the signed end values
        // of the four incident cells telescope to zero
        let junction_ends: Vec<(usize, usize)> = (0..4)
            .flat_map(|cell| (0..2).map(move |end| (cell, end)))
            .filter(|&(cell, end)| {
                mesh.fractures[cell].nodes[end] == mesh.junctions()[0]
            })
            .collect();
        assert_eq!(junction_ends.len(), 4);
        let t = [0.7, -1.3, 0.4];
        let mut net = 0.0;
        for &(cell, end) in &junction_ends {
            let s = if end == 0 { -1.0 } else { 1.0 };
            let q: f64 = dofs.discharges[cell][end]
                .iter()
                .map(|&(dof, c)| c * t[dof - mesh.faces().len() - 0])
                .sum();
            net += s * q;
        }
        assert!(net.abs() < 1e-15);
    }

    #[test]
    fn boundary_endpoints_follow_the_inherited_flow_condition() {
        let frac = FractureSpec { start: [0.5, 0.0], end: [0.5, 0.5], cross_section: 1e-4 };
        let mesh = square_with(vec![frac]);

        let sealed = build_dofs(&mesh, &[noflow_roller_tag("wall")]).unwrap();
        assert_eq!(sealed.n_tangential(), 1, "interior node only, endpoint sealed");
        assert!(sealed.endpoint_bcs.is_empty());

        let draining = build_dofs(&mesh, &[dirichlet_tag("wall", 300.0)]).unwrap();
        assert_eq!(draining.n_tangential(), 2, "endpoint drains through the boundary");
        assert_eq!(draining.endpoint_bcs.len(), 1);
        assert_eq!(draining.endpoint_bcs[0].sign, -1.0);
    }

    #[test]
    fn dirichlet_facets_fix_their_node_components() {
        let mesh = square_with(vec![]);
        let dofs = build_dofs(&mesh, &[noflow_roller_tag("wall")]).unwrap();
        // the roller tag fixes the y component only, on every boundary node
        assert_eq!(dofs.fixed_displacements.len(), 16);
        assert!(dofs.fixed_displacements.iter().all(|f| f.component == 1));
        assert!(dofs.fixed_fluxes.len() == 16);
        let again = build_dofs(&mesh, &[noflow_roller_tag("wall")]).unwrap();
        assert_eq!(again.fixed_displacements, dofs.fixed_displacements);
        assert_eq!(again.fixed_fluxes, dofs.fixed_fluxes);
    }

    #[test]
    fn missing_tag_definition_is_an_error() {
        let mesh = square_with(vec![]);
        let err = build_dofs(&mesh, &[traction_tag("other")]).unwrap_err();
        assert!(matches!(err, AssemblyError::UnknownTag { name } if name == "wall"));
    }
}
