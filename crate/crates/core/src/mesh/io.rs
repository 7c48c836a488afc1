//! Plain-text mesh files.
//!
//! ```text
//! dfm-mesh 1
//! nodes <count>
//!   <id> <x> <y>
//! triangles <count>
//!   <id> <node> <node> <node> <region>
//! fracture-nodes <count>
//!   <id> <x> <y>
//! fractures <count>
//!   <id> <node> <node> <cross-section> <normal-x> <normal-y> <plus-face> <minus-face>
//! boundary <count>
//!   <node> <node> <tag-name>
//! ```
//!
//! Blocks appear in this order; ids are consecutive from zero. Face ids
//! refer to the mesh's face table: node pairs (min, max) of all triangle
//! edges in lexicographic order. `#` starts a comment, blank lines are
//! skipped, tag names carry no whitespace. Floats are written with 17
//! significant digits, so save and load round-trip exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{BoundaryFacet, FractureCell, MeshError, MixedDimMesh};
use crate::Real;

pub fn save_mesh<T: Real>(mesh: &MixedDimMesh<T>, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let mut out = Vec::new();
    let num = |v: T| format!("{:.17e}", v.to_f64().unwrap());
    writeln!(out, "dfm-mesh 1")?;
    writeln!(out, "nodes {}", mesh.nodes.len())?;
    for (i, p) in mesh.nodes.iter().enumerate() {
        writeln!(out, "{i} {} {}", num(p[0]), num(p[1]))?;
    }
    writeln!(out, "triangles {}", mesh.triangles.len())?;
    for (i, tri) in mesh.triangles.iter().enumerate() {
        let region = mesh.triangle_regions[i];
        writeln!(out, "{i} {} {} {} {region}", tri[0], tri[1], tri[2])?;
    }
    writeln!(out, "fracture-nodes {}", mesh.fracture_nodes.len())?;
    for (i, p) in mesh.fracture_nodes.iter().enumerate() {
        writeln!(out, "{i} {} {}", num(p[0]), num(p[1]))?;
    }
    writeln!(out, "fractures {}", mesh.fractures.len())?;
    for (i, cell) in mesh.fractures.iter().enumerate() {
        let face = |wall: [usize; 2]| {
            mesh.face_id(wall[0], wall[1]).ok_or_else(|| {
                MeshError::Geometry(format!("fracture cell {i} wall is not a matrix face"))
            })
        };
        writeln!(
            out,
            "{i} {} {} {} {} {} {} {}",
            cell.nodes[0],
            cell.nodes[1],
            num(cell.cross_section),
            num(cell.normal[0]),
            num(cell.normal[1]),
            face(cell.plus_wall)?,
            face(cell.minus_wall)?,
        )?;
    }
    writeln!(out, "boundary {}", mesh.boundary_facets.len())?;
    for facet in &mesh.boundary_facets {
        let name = &mesh.tag_names[facet.tag];
        if name.contains(char::is_whitespace) || name.contains('#') || name.is_empty() {
            return Err(MeshError::Geometry(format!(
                "tag name {name:?} cannot be written to a mesh file"
            )));
        }
        writeln!(out, "{} {} {name}", facet.nodes[0], facet.nodes[1])?;
    }
    fs::write(path, out)?;
    Ok(())
}

/// Loads and validates a mesh; any broken invariant fails the load.
pub fn load_mesh<T: Real>(path: impl AsRef<Path>) -> Result<MixedDimMesh<T>, MeshError> {
    let text = fs::read_to_string(path)?;
    let mesh = parse_mesh(&text)?;
    let violations = mesh.validate();
    if violations.is_empty() {
        Ok(mesh)
    } else {
        Err(MeshError::Invalid(violations))
    }
}

fn parse_mesh<T: Real>(text: &str) -> Result<MixedDimMesh<T>, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, line)| {
            let body = line.split('#').next().unwrap_or("");
            (k + 1, body.split_whitespace().collect::<Vec<_>>())
        })
        .filter(|(_, tokens)| !tokens.is_empty());
    let end = text.lines().count() + 1;
    let mut next = |expect: &str| -> Result<(usize, Vec<&str>), MeshError> {
        lines.next().ok_or_else(|| MeshError::Parse {
            line: end,
            message: format!("unexpected end of file, expected {expect}"),
        })
    };

    let (line, header) = next("the dfm-mesh header")?;
    if header != ["dfm-mesh", "1"] {
        return Err(MeshError::Parse { line, message: "expected header `dfm-mesh 1`".into() });
    }

    let block_len = |tokens: &[&str], line: usize, keyword: &str| -> Result<usize, MeshError> {
        if tokens.len() != 2 || tokens[0] != keyword {
            return Err(MeshError::Parse {
                line,
                message: format!("expected `{keyword} <count>`"),
            });
        }
        parse_usize(tokens[1], line)
    };

    let (line, tokens) = next("the nodes block")?;
    let n_nodes = block_len(&tokens, line, "nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for want in 0..n_nodes {
        let (line, tokens) = next("a node line")?;
        check_arity(&tokens, 3, line, "node")?;
        check_id(tokens[0], want, line)?;
        nodes.push([parse_real::<T>(tokens[1], line)?, parse_real::<T>(tokens[2], line)?]);
    }

    let (line, tokens) = next("the triangles block")?;
    let n_tris = block_len(&tokens, line, "triangles")?;
    let mut triangles = Vec::with_capacity(n_tris);
    let mut regions = Vec::with_capacity(n_tris);
    for want in 0..n_tris {
        let (line, tokens) = next("a triangle line")?;
        check_arity(&tokens, 5, line, "triangle")?;
        check_id(tokens[0], want, line)?;
        triangles.push([
            parse_usize(tokens[1], line)?,
            parse_usize(tokens[2], line)?,
            parse_usize(tokens[3], line)?,
        ]);
        regions.push(parse_usize(tokens[4], line)?);
    }

    // the face table exists once the triangles are known; fracture lines
    // reference it by id
    let mut faces: Vec<[usize; 2]> = triangles
        .iter()
        .flat_map(|tri| {
            (0..3).map(|k| {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                [a.min(b), a.max(b)]
            })
        })
        .collect();
    faces.sort_unstable();
    faces.dedup();

    let (line, tokens) = next("the fracture-nodes block")?;
    let n_fnodes = block_len(&tokens, line, "fracture-nodes")?;
    let mut fracture_nodes = Vec::with_capacity(n_fnodes);
    for want in 0..n_fnodes {
        let (line, tokens) = next("a fracture-node line")?;
        check_arity(&tokens, 3, line, "fracture-node")?;
        check_id(tokens[0], want, line)?;
        fracture_nodes
            .push([parse_real::<T>(tokens[1], line)?, parse_real::<T>(tokens[2], line)?]);
    }

    let (line, tokens) = next("the fractures block")?;
    let n_fracs = block_len(&tokens, line, "fractures")?;
    let mut fractures = Vec::with_capacity(n_fracs);
    for want in 0..n_fracs {
        let (line, tokens) = next("a fracture line")?;
        check_arity(&tokens, 8, line, "fracture")?;
        check_id(tokens[0], want, line)?;
        let wall = |token: &str| -> Result<[usize; 2], MeshError> {
            let id = parse_usize(token, line)?;
            faces.get(id).copied().ok_or(MeshError::Parse {
                line,
                message: format!("unknown face id {id}"),
            })
        };
        fractures.push(FractureCell {
            nodes: [parse_usize(tokens[1], line)?, parse_usize(tokens[2], line)?],
            cross_section: parse_real::<T>(tokens[3], line)?,
            normal: [parse_real::<T>(tokens[4], line)?, parse_real::<T>(tokens[5], line)?],
            plus_wall: wall(tokens[6])?,
            minus_wall: wall(tokens[7])?,
        });
    }

    let (line, tokens) = next("the boundary block")?;
    let n_facets = block_len(&tokens, line, "boundary")?;
    let mut boundary_facets = Vec::with_capacity(n_facets);
    let mut tag_names: Vec<String> = Vec::new();
    for _ in 0..n_facets {
        let (line, tokens) = next("a boundary line")?;
        check_arity(&tokens, 3, line, "boundary facet")?;
        let name = tokens[2];
        let tag = match tag_names.iter().position(|n| n == name) {
            Some(k) => k,
            None => {
                tag_names.push(name.to_string());
                tag_names.len() - 1
            }
        };
        boundary_facets.push(BoundaryFacet {
            nodes: [parse_usize(tokens[0], line)?, parse_usize(tokens[1], line)?],
            tag,
        });
    }

    if let Some((line, _)) = lines.next() {
        return Err(MeshError::Parse { line, message: "trailing content after the boundary block".into() });
    }

    MixedDimMesh::new(
        nodes,
        triangles,
        regions,
        fracture_nodes,
        fractures,
        boundary_facets,
        tag_names,
    )
}

fn check_arity(tokens: &[&str], want: usize, line: usize, what: &str) -> Result<(), MeshError> {
    if tokens.len() == want {
        Ok(())
    } else {
        Err(MeshError::Parse {
            line,
            message: format!("a {what} line has {want} fields, found {}", tokens.len()),
        })
    }
}

fn check_id(token: &str, want: usize, line: usize) -> Result<(), MeshError> {
    let id = parse_usize(token, line)?;
    if id == want {
        Ok(())
    } else {
        Err(MeshError::Parse { line, message: format!("expected id {want}, found {id}") })
    }
}

fn parse_usize(token: &str, line: usize) -> Result<usize, MeshError> {
    token.parse().map_err(|_| MeshError::Parse {
        line,
        message: format!("expected an integer, found {token:?}"),
    })
}

fn parse_real<T: Real>(token: &str, line: usize) -> Result<T, MeshError> {
    let value: f64 = token.parse().map_err(|_| MeshError::Parse {
        line,
        message: format!("expected a number, found {token:?}"),
    })?;
    Ok(T::of(value))
}
