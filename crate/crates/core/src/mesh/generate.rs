//! Structured triangulations of rectangles with embedded fracture lines.
//!
//! Cells are split along randomly oriented diagonals (seeded, reproducible)
//! except where a diagonal fracture dictates the orientation. Fracture lines
//! snap to the grid, so they must be horizontal, vertical, or at ±45° to it.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BoundaryFacet, FractureCell, MeshError, MixedDimMesh};
use crate::Real;

/// One straight fracture with a uniform initial cross-section.
#[derive(Debug, Clone)]
pub struct FractureSpec<T> {
    pub start: [T; 2],
    pub end: [T; 2],
    pub cross_section: T,
}

#[derive(Debug, Clone)]
pub struct RectDfmSpec<T> {
    /// [[x0, y0], [x1, y1]]
    pub extents: [[T; 2]; 2],
    /// cells along x and y
    pub cells: [usize; 2],
    pub fractures: Vec<FractureSpec<T>>,
    /// rectangles removed from the grid, snapped to whole cells
    pub cutouts: Vec<[[T; 2]; 2]>,
    /// seed for the diagonal orientations
    pub seed: u64,
}

/// Generates a fractured rectangle mesh. `tag_of` names the boundary tag of
/// each boundary facet from its midpoint and outward normal; facets are
/// visited in face order, so tag numbering is reproducible.
pub fn generate_rect_dfm<T: Real>(
    spec: &RectDfmSpec<T>,
    tag_of: impl Fn([T; 2], [T; 2]) -> String,
) -> Result<MixedDimMesh<T>, MeshError> {
    let [nx, ny] = spec.cells;
    let [[x0, y0], [x1, y1]] = spec.extents;
    if nx == 0 || ny == 0 {
        return Err(MeshError::Geometry("cell counts must be positive".into()));
    }
    if !(x1 > x0) || !(y1 > y0) {
        return Err(MeshError::Geometry("extents must be a nonempty rectangle".into()));
    }
    let hx = (x1 - x0) / T::of(nx as f64);
    let hy = (y1 - y0) / T::of(ny as f64);
    let xs: Vec<T> = (0..=nx).map(|i| x0 + hx * T::of(i as f64)).collect();
    let ys: Vec<T> = (0..=ny).map(|j| y0 + hy * T::of(j as f64)).collect();
    let gid = |i: usize, j: usize| j * (nx + 1) + i;

    // snap fractures to grid nodes and walk their edge paths
    let snap = |p: [T; 2]| -> Result<(usize, usize), MeshError> {
        let tol_x = hx * T::of(1e-9);
        let tol_y = hy * T::of(1e-9);
        if p[0] < x0 - tol_x || p[0] > x1 + tol_x || p[1] < y0 - tol_y || p[1] > y1 + tol_y {
            return Err(MeshError::Geometry(format!(
                "fracture endpoint ({:?}, {:?}) lies outside the extents",
                p[0], p[1]
            )));
        }
        let i = ((p[0] - x0) / hx).round().to_f64().unwrap() as isize;
        let j = ((p[1] - y0) / hy).round().to_f64().unwrap() as isize;
        Ok((i.clamp(0, nx as isize) as usize, j.clamp(0, ny as isize) as usize))
    };
    let mut fracture_paths: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut fracture_edges: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    let mut forced_diagonals: BTreeMap<usize, bool> = BTreeMap::new();
    for (s, frac) in spec.fractures.iter().enumerate() {
        if !(frac.cross_section > T::zero()) {
            return Err(MeshError::Geometry(format!(
                "fracture {s} must have a positive cross-section"
            )));
        }
        let (i0, j0) = snap(frac.start)?;
        let (i1, j1) = snap(frac.end)?;
        let di = i1 as isize - i0 as isize;
        let dj = j1 as isize - j0 as isize;
        if di == 0 && dj == 0 {
            return Err(MeshError::Geometry(format!(
                "fracture {s} has zero length after snapping"
            )));
        }
        if di != 0 && dj != 0 && di.abs() != dj.abs() {
            return Err(MeshError::Geometry(format!(
                "fracture {s} is not grid aligned (horizontal, vertical, or diagonal)"
            )));
        }
        let steps = di.abs().max(dj.abs());
        if steps < 2 {
            return Err(MeshError::Geometry(format!(
                "fracture {s} must span at least two grid edges"
            )));
        }
        let sx = di.signum();
        let sy = dj.signum();
        let mut path = Vec::with_capacity(steps as usize);
        for k in 0..steps {
            let ia = (i0 as isize + k * sx) as usize;
            let ja = (j0 as isize + k * sy) as usize;
            let ib = (i0 as isize + (k + 1) * sx) as usize;
            let jb = (j0 as isize + (k + 1) * sy) as usize;
            if sx != 0 && sy != 0 {
                let cell = ja.min(jb) * nx + ia.min(ib);
                let main = sx == sy;
                if let Some(&prev) = forced_diagonals.get(&cell) {
                    if prev != main {
                        return Err(MeshError::Geometry(format!(
                            "fracture {s} needs the opposite diagonal of an already forced cell"
                        )));
                    }
                } else {
                    forced_diagonals.insert(cell, main);
                }
            }
            let a = gid(ia, ja);
            let b = gid(ib, jb);
            if fracture_edges.insert([a.min(b), a.max(b)], s).is_some() {
                return Err(MeshError::Geometry(format!(
                    "fracture {s} overlaps another fracture"
                )));
            }
            path.push((a, b));
        }
        fracture_paths.push(path);
    }

    // cut-out cells are removed whole, by their center
    let half = T::of(0.5);
    let live = |ci: usize, cj: usize| -> bool {
        let cx = (xs[ci] + xs[ci + 1]) * half;
        let cy = (ys[cj] + ys[cj + 1]) * half;
        !spec.cutouts.iter().any(|&[[ax, ay], [bx, by]]| {
            cx > ax && cx < bx && cy > ay && cy < by
        })
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut main_diagonal: Vec<bool> = (0..nx * ny).map(|_| rng.gen()).collect();
    for (&cell, &main) in &forced_diagonals {
        main_diagonal[cell] = main;
    }

    // provisional triangles over grid node ids, counterclockwise
    let mut grid_tris: Vec<[usize; 3]> = Vec::new();
    for cj in 0..ny {
        for ci in 0..nx {
            if !live(ci, cj) {
                continue;
            }
            let a = gid(ci, cj);
            let b = gid(ci + 1, cj);
            let c = gid(ci + 1, cj + 1);
            let d = gid(ci, cj + 1);
            if main_diagonal[cj * nx + ci] {
                grid_tris.push([a, b, c]);
                grid_tris.push([a, c, d]);
            } else {
                grid_tris.push([a, b, d]);
                grid_tris.push([b, c, d]);
            }
        }
    }
    if grid_tris.is_empty() {
        return Err(MeshError::Geometry("cut-outs removed every cell".into()));
    }

    let mut edge_tris: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
    for (t, tri) in grid_tris.iter().enumerate() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let key = [a.min(b), a.max(b)];
            if fracture_edges.contains_key(&key) {
                edge_tris.entry(key).or_default().push(t);
            }
        }
    }
    for key in fracture_edges.keys() {
        if edge_tris.get(key).map_or(0, Vec::len) != 2 {
            return Err(MeshError::Geometry(
                "fracture edge is not interior to the mesh (boundary or cut-out)".into(),
            ));
        }
    }

    // duplicate matrix nodes: around each grid node, triangles connected
    // through non-fracture edges form a fan component; each component
    // becomes one node copy, so fans merge at fracture tips
    let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (t, tri) in grid_tris.iter().enumerate() {
        for &g in tri {
            incident.entry(g).or_default().push(t);
        }
    }
    let grid_coords = |g: usize| -> [T; 2] { [xs[g % (nx + 1)], ys[g / (nx + 1)]] };
    let mut nodes: Vec<[T; 2]> = Vec::new();
    let mut final_tris: Vec<[usize; 3]> = vec![[usize::MAX; 3]; grid_tris.len()];
    for (&g, ts) in &incident {
        let mut parent: Vec<usize> = (0..ts.len()).collect();
        fn find(parent: &mut [usize], mut v: usize) -> usize {
            while parent[v] != v {
                parent[v] = parent[parent[v]];
                v = parent[v];
            }
            v
        }
        let mut at_other: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (l, &t) in ts.iter().enumerate() {
            for &o in &grid_tris[t] {
                if o != g {
                    at_other.entry(o).or_default().push(l);
                }
            }
        }
        for (&o, locs) in &at_other {
            let key = [g.min(o), g.max(o)];
            if locs.len() == 2 && !fracture_edges.contains_key(&key) {
                let (ra, rb) = (find(&mut parent, locs[0]), find(&mut parent, locs[1]));
                parent[ra] = rb;
            }
        }
        let mut component_first: BTreeMap<usize, usize> = BTreeMap::new();
        for l in 0..ts.len() {
            let root = find(&mut parent, l);
            component_first.entry(root).or_insert(l);
        }
        let mut order: Vec<usize> = component_first.values().copied().collect();
        order.sort_unstable();
        let mut copy_of = vec![usize::MAX; ts.len()];
        for &first in &order {
            let id = nodes.len();
            nodes.push(grid_coords(g));
            let root_first = find(&mut parent, first);
            for l in 0..ts.len() {
                if find(&mut parent, l) == root_first {
                    copy_of[l] = id;
                }
            }
        }
        for (l, &t) in ts.iter().enumerate() {
            let corner = grid_tris[t].iter().position(|&v| v == g).unwrap();
            final_tris[t][corner] = copy_of[l];
        }
    }

    // fracture entities: one fracture node per geometric point, shared
    // across intersecting fractures
    let fracture_grid_nodes: BTreeSet<usize> = fracture_edges
        .keys()
        .flat_map(|&[a, b]| [a, b])
        .collect();
    let fracture_node_of: BTreeMap<usize, usize> = fracture_grid_nodes
        .iter()
        .enumerate()
        .map(|(k, &g)| (g, k))
        .collect();
    let fracture_nodes: Vec<[T; 2]> = fracture_grid_nodes.iter().map(|&g| grid_coords(g)).collect();

    let final_pair = |t: usize, g: usize| -> usize {
        let corner = grid_tris[t].iter().position(|&v| v == g).unwrap();
        final_tris[t][corner]
    };
    let mut fractures: Vec<FractureCell<T>> = Vec::new();
    for (s, path) in fracture_paths.iter().enumerate() {
        for &(ga, gb) in path {
            let pa = grid_coords(ga);
            let pb = grid_coords(gb);
            let dx = pb[0] - pa[0];
            let dy = pb[1] - pa[1];
            let len = (dx * dx + dy * dy).sqrt();
            let normal = [-dy / len, dx / len];
            let key = [ga.min(gb), ga.max(gb)];
            let adj = &edge_tris[&key];
            let mid = [(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half];
            let mut walls = [[usize::MAX; 2]; 2];
            let mut plus_slot = usize::MAX;
            for (w, &t) in adj.iter().enumerate() {
                let na = final_pair(t, ga);
                let nb = final_pair(t, gb);
                walls[w] = [na.min(nb), na.max(nb)];
                let c = centroid(&nodes, final_tris[t]);
                if (c[0] - mid[0]) * normal[0] + (c[1] - mid[1]) * normal[1] > T::zero() {
                    plus_slot = w;
                }
            }
            if plus_slot == usize::MAX {
                return Err(MeshError::Geometry(
                    "no triangle lies on the normal side of a fracture edge".into(),
                ));
            }
            fractures.push(FractureCell {
                nodes: [fracture_node_of[&ga], fracture_node_of[&gb]],
                cross_section: spec.fractures[s].cross_section,
                normal,
                plus_wall: walls[plus_slot],
                minus_wall: walls[1 - plus_slot],
            });
        }
    }

    // boundary facets: single-triangle faces that are not fracture walls
    let wall_faces: BTreeSet<[usize; 2]> = fractures
        .iter()
        .flat_map(|f| [f.plus_wall, f.minus_wall])
        .collect();
    let mut face_owner: BTreeMap<[usize; 2], (usize, usize)> = BTreeMap::new();
    for (t, tri) in final_tris.iter().enumerate() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let entry = face_owner.entry([a.min(b), a.max(b)]).or_insert((0, t));
            entry.0 += 1;
        }
    }
    let mut tag_names: Vec<String> = Vec::new();
    let mut boundary_facets: Vec<BoundaryFacet> = Vec::new();
    for (&pair, &(count, tri)) in &face_owner {
        if count != 1 || wall_faces.contains(&pair) {
            continue;
        }
        let a = nodes[pair[0]];
        let b = nodes[pair[1]];
        let mid = [(a[0] + b[0]) * half, (a[1] + b[1]) * half];
        let len = ((b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1])).sqrt();
        let mut normal = [-(b[1] - a[1]) / len, (b[0] - a[0]) / len];
        let c = centroid(&nodes, final_tris[tri]);
        if (mid[0] - c[0]) * normal[0] + (mid[1] - c[1]) * normal[1] < T::zero() {
            normal = [-normal[0], -normal[1]];
        }
        let name = tag_of(mid, normal);
        let tag = match tag_names.iter().position(|n| n == &name) {
            Some(k) => k,
            None => {
                tag_names.push(name);
                tag_names.len() - 1
            }
        };
        boundary_facets.push(BoundaryFacet { nodes: pair, tag });
    }

    let regions = vec![0; final_tris.len()];
    let mesh = MixedDimMesh::new(
        nodes,
        final_tris,
        regions,
        fracture_nodes,
        fractures,
        boundary_facets,
        tag_names,
    )?;
    let violations = mesh.validate();
    if !violations.is_empty() {
        return Err(MeshError::Invalid(violations));
    }
    Ok(mesh)
}

fn centroid<T: Real>(nodes: &[[T; 2]], tri: [usize; 3]) -> [T; 2] {
    let third = T::of(1.0 / 3.0);
    [
        (nodes[tri[0]][0] + nodes[tri[1]][0] + nodes[tri[2]][0]) * third,
        (nodes[tri[0]][1] + nodes[tri[1]][1] + nodes[tri[2]][1]) * third,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(cells: usize, fractures: Vec<FractureSpec<f64>>) -> RectDfmSpec<f64> {
        RectDfmSpec {
            extents: [[0.0, 0.0], [1.0, 1.0]],
            cells: [cells, cells],
            fractures,
            cutouts: vec![],
            seed: 7,
        }
    }

    fn any_tag(_: [f64; 2], _: [f64; 2]) -> String {
        "wall".into()
    }

    #[test]
    fn plain_grid_counts() {
        let mesh = generate_rect_dfm(&unit_square(2, vec![]), any_tag).unwrap();
        assert_eq!(mesh.n_nodes(), 9);
        assert_eq!(mesh.n_triangles(), 8);
        assert_eq!(mesh.n_fractures(), 0);
        assert_eq!(mesh.boundary_facets.len(), 8);
        assert!(mesh.validate().is_empty());
        let total: f64 = (0..8).map(|t| mesh.triangle_area(t).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn horizontal_fracture_duplicates_interior_nodes_only() {
        let frac = FractureSpec {
            start: [0.25, 0.5],
            end: [0.75, 0.5],
            cross_section: 1e-4,
        };
        let mesh = generate_rect_dfm(&unit_square(4, vec![frac]), any_tag).unwrap();
        // 25 grid nodes, one interior fracture node duplicated
        assert_eq!(mesh.n_nodes(), 26);
        assert_eq!(mesh.n_triangles(), 32);
        assert_eq!(mesh.n_fractures(), 2);
        assert_eq!(mesh.fracture_nodes.len(), 3);
        assert_eq!(mesh.interior_tips().len(), 2);
        assert!(mesh.junctions().is_empty());
        assert!(mesh.boundary_endpoints().is_empty());
        assert!(mesh.validate().is_empty());
        for f in 0..2 {
            let frame = mesh.fracture_frame(f).unwrap();
            assert_eq!(frame.normal, [0.0, 1.0]);
            assert_ne!(frame.plus_trace, frame.minus_trace);
            // + trace sits above the fracture, duplicates coincide exactly
            for end in 0..2 {
                let p = mesh.nodes[frame.plus_trace[end]];
                let m = mesh.nodes[frame.minus_trace[end]];
                assert_eq!(p, m);
            }
            let c = mesh.triangle_centroid(frame.plus_triangle);
            assert!(c[1] > 0.5);
            let c = mesh.triangle_centroid(frame.minus_triangle);
            assert!(c[1] < 0.5);
        }
        // duplicated wall pairs share the merged tip copies
        let f0 = mesh.fracture_frame(0).unwrap();
        let f1 = mesh.fracture_frame(1).unwrap();
        assert_eq!(f0.plus_trace[1], f1.plus_trace[0]);
        assert_eq!(f0.minus_trace[1], f1.minus_trace[0]);
        assert_eq!(f0.plus_trace[0], f0.minus_trace[0], "tip copies merge");
    }

    #[test]
    fn crossing_fractures_share_a_junction_node() {
        let horizontal = FractureSpec {
            start: [0.25, 0.5],
            end: [0.75, 0.5],
            cross_section: 1e-4,
        };
        let vertical = FractureSpec {
            start: [0.5, 0.25],
            end: [0.5, 0.75],
            cross_section: 2e-4,
        };
        let mesh =
            generate_rect_dfm(&unit_square(4, vec![horizontal, vertical]), any_tag).unwrap();
        // the crossing splits the center fan into four copies
        assert_eq!(mesh.n_nodes(), 28);
        assert_eq!(mesh.n_fractures(), 4);
        assert_eq!(mesh.fracture_nodes.len(), 5);
        assert_eq!(mesh.junctions().len(), 1);
        assert_eq!(mesh.interior_tips().len(), 4);
        assert!(mesh.validate().is_empty());
        let junction = mesh.junctions()[0];
        assert_eq!(mesh.fracture_nodes[junction], [0.5, 0.5]);
        assert_eq!(mesh.matrix_nodes_at(junction).len(), 4);
    }

    #[test]
    fn fracture_reaching_the_boundary_splits_the_boundary_node() {
        let frac = FractureSpec {
            start: [0.5, 0.0],
            end: [0.5, 0.5],
            cross_section: 1e-4,
        };
        let mesh = generate_rect_dfm(&unit_square(4, vec![frac]), any_tag).unwrap();
        assert_eq!(mesh.n_nodes(), 27);
        assert_eq!(mesh.boundary_endpoints().len(), 1);
        assert_eq!(mesh.interior_tips().len(), 1);
        let endpoint = mesh.boundary_endpoints()[0];
        assert_eq!(mesh.fracture_nodes[endpoint], [0.5, 0.0]);
        assert_eq!(mesh.matrix_nodes_at(endpoint).len(), 2);
        assert!(mesh.validate().is_empty());
    }

    #[test]
    fn diagonal_fracture_forces_cell_diagonals() {
        let frac = FractureSpec {
            start: [0.0, 0.0],
            end: [0.75, 0.75],
            cross_section: 1e-4,
        };
        for seed in [0, 1, 2, 3] {
            let mut spec = unit_square(4, vec![frac.clone()]);
            spec.seed = seed;
            let mesh = generate_rect_dfm(&spec, any_tag).unwrap();
            assert_eq!(mesh.n_fractures(), 3);
            assert!(mesh.validate().is_empty());
            let frame = mesh.fracture_frame(1).unwrap();
            let s = 0.5f64.sqrt();
            assert!((frame.normal[0] + s).abs() < 1e-12);
            assert!((frame.normal[1] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn conflicting_diagonals_are_rejected() {
        let main = FractureSpec {
            start: [0.0, 0.0],
            end: [0.5, 0.5],
            cross_section: 1e-4,
        };
        let anti = FractureSpec {
            start: [0.75, 0.0],
            end: [0.0, 0.75],
            cross_section: 1e-4,
        };
        let err = generate_rect_dfm(&unit_square(4, vec![main, anti]), any_tag).unwrap_err();
        assert!(matches!(err, MeshError::Geometry(m) if m.contains("opposite diagonal")));
    }

    #[test]
    fn misplaced_fractures_are_rejected() {
        let outside = FractureSpec {
            start: [0.25, 0.5],
            end: [1.5, 0.5],
            cross_section: 1e-4,
        };
        let err = generate_rect_dfm(&unit_square(4, vec![outside]), any_tag).unwrap_err();
        assert!(matches!(err, MeshError::Geometry(m) if m.contains("outside")));

        let degenerate = FractureSpec {
            start: [0.5, 0.5],
            end: [0.55, 0.5],
            cross_section: 1e-4,
        };
        let err = generate_rect_dfm(&unit_square(4, vec![degenerate]), any_tag).unwrap_err();
        assert!(matches!(err, MeshError::Geometry(m) if m.contains("zero length")));

        let skew = FractureSpec {
            start: [0.0, 0.0],
            end: [0.25, 0.75],
            cross_section: 1e-4,
        };
        let err = generate_rect_dfm(&unit_square(4, vec![skew]), any_tag).unwrap_err();
        assert!(matches!(err, MeshError::Geometry(m) if m.contains("aligned")));

        let overlapping = vec![
            FractureSpec { start: [0.25, 0.5], end: [0.75, 0.5], cross_section: 1e-4 },
            FractureSpec { start: [0.5, 0.5], end: [1.0, 0.5], cross_section: 1e-4 },
        ];
        let err = generate_rect_dfm(&unit_square(4, overlapping), any_tag).unwrap_err();
        assert!(matches!(err, MeshError::Geometry(m) if m.contains("overlaps")));
    }

    #[test]
    fn cutout_removes_cells_and_keeps_the_hole_tagged() {
        let spec = RectDfmSpec {
            extents: [[0.0, 0.0], [4.0, 4.0]],
            cells: [4, 4],
            fractures: vec![],
            cutouts: vec![[[1.0, 1.0], [3.0, 3.0]]],
            seed: 3,
        };
        let mesh = generate_rect_dfm(&spec, |mid, _| {
            if mid[0] > 1.0 - 1e-9 && mid[0] < 3.0 + 1e-9 && mid[1] > 1.0 - 1e-9
                && mid[1] < 3.0 + 1e-9
            {
                "hole".into()
            } else {
                "outer".into()
            }
        })
        .unwrap();
        assert_eq!(mesh.n_triangles(), 24);
        assert!(mesh.validate().is_empty());
        let total: f64 = (0..24).map(|t| mesh.triangle_area(t).unwrap()).sum();
        assert!((total - 12.0).abs() < 1e-10);
        let hole = mesh.tag_names.iter().position(|n| n == "hole").unwrap();
        let hole_facets = mesh
            .boundary_facets
            .iter()
            .filter(|f| f.tag == hole)
            .count();
        assert_eq!(hole_facets, 8);
    }

    #[test]
    fn fracture_through_a_cutout_is_rejected() {
        let spec = RectDfmSpec {
            extents: [[0.0, 0.0], [4.0, 4.0]],
            cells: [4, 4],
            fractures: vec![FractureSpec {
                start: [1.0, 2.0],
                end: [3.0, 2.0],
                cross_section: 1e-4,
            }],
            cutouts: vec![[[1.0, 1.0], [3.0, 3.0]]],
            seed: 3,
        };
        let err = generate_rect_dfm(&spec, any_tag).unwrap_err();
        assert!(matches!(err, MeshError::Geometry(m) if m.contains("interior")));
    }

    #[test]
    fn same_seed_reproduces_the_same_mesh() {
        let frac = FractureSpec {
            start: [0.25, 0.5],
            end: [0.75, 0.5],
            cross_section: 1e-4,
        };
        let a = generate_rect_dfm(&unit_square(4, vec![frac.clone()]), any_tag).unwrap();
        let b = generate_rect_dfm(&unit_square(4, vec![frac]), any_tag).unwrap();
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.triangles, b.triangles);
        assert_eq!(a.fractures, b.fractures);
        assert_eq!(a.boundary_facets, b.boundary_facets);
    }
}
