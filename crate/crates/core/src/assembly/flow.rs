//! Storage, divergence and Darcy forms of the mixed flow problem.
//!
//! The flux orientation convention: the unknown on face (a, b) with a < b is
//! the total flux through the face in the direction obtained by rotating
//! b − a counterclockwise. In a counterclockwise triangle the edge traversed
//! from the smaller to the larger node id therefore sees that direction as
//! inward, which fixes every divergence sign below.

use super::{AssemblyError, DofMap, FractureParameters, HmParameters};
use crate::linalg::{SparseBuilder, SparseMatrix};
use crate::mesh::{MeshError, MixedDimMesh};
use crate::Real;

/// Aperture-dependent flow coefficients of every fracture cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FractureState<T> {
    pub apertures: Vec<T>,
    pub conductivities: Vec<T>,
    /// whether the cell sits on the minimal-aperture bound
    pub contact_active: Vec<bool>,
}

impl<T: Real> FractureState<T> {
    /// The undisturbed state: every cell at its reference cross-section.
    pub fn resting(mesh: &MixedDimMesh<T>, fracture: &FractureParameters<T>) -> Self {
        let factor = fracture.transmissivity_factor();
        let apertures: Vec<T> = mesh.fractures.iter().map(|fc| fc.cross_section).collect();
        let conductivities = apertures.iter().map(|&a| factor * a * a).collect();
        FractureState {
            contact_active: vec![false; apertures.len()],
            apertures,
            conductivities,
        }
    }

    pub fn active_count(&self) -> usize {
        self.contact_active.iter().filter(|&&a| a).count()
    }
}

/// Recomputes apertures and cubic-law conductivities from a displacement
/// vector. The cell aperture is the reference cross-section plus the averaged
/// half-jump of the wall displacements, floored at the minimal cross-section;
/// cells on the floor are flagged as active contacts.
pub fn update_fracture_state<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    params: &HmParameters<T>,
    displacement: &[T],
) -> Result<FractureState<T>, AssemblyError> {
    let factor = params.fracture.transmissivity_factor();
    let floor = params.fracture.min_cross_section;
    let quarter = T::of(0.25);
    let tol = T::of(1e-10);
    let mut apertures = Vec::with_capacity(mesh.n_fractures());
    let mut conductivities = Vec::with_capacity(mesh.n_fractures());
    let mut contact_active = Vec::with_capacity(mesh.n_fractures());
    for (cell, fc) in mesh.fractures.iter().enumerate() {
        let frame = mesh.fracture_frame(cell)?;
        let mut opening = T::zero();
        for end in 0..2 {
            for c in 0..2 {
                let jump = displacement[dofs.matrix_displacement(frame.plus_trace[end], c)]
                    - displacement[dofs.matrix_displacement(frame.minus_trace[end], c)];
                opening += quarter * frame.normal[c] * jump;
            }
        }
        let raw = fc.cross_section + opening;
        let aperture = raw.max(floor);
        apertures.push(aperture);
        conductivities.push(factor * aperture * aperture);
        contact_active.push(raw < floor || (raw - floor).abs() <= tol);
    }
    Ok(FractureState { apertures, conductivities, contact_active })
}

/// Assembles the storage and fixed-stress stabilization diagonals.
pub fn assemble_storage<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    params: &HmParameters<T>,
) -> Result<(SparseMatrix<T>, SparseMatrix<T>), AssemblyError> {
    params.validate()?;
    let n = dofs.n_pressure();
    let mut storage = SparseBuilder::new(n, n);
    let mut stabilization = SparseBuilder::new(n, n);
    for cell in 0..mesh.n_triangles() {
        let region = mesh.triangle_regions[cell];
        let area = mesh.triangle_area(cell)?;
        let row = dofs.matrix_pressure(cell);
        storage.add(row, row, params.region(region)?.storativity * area);
        stabilization.add(row, row, params.matrix_stabilization(region)? * area);
    }
    for (cell, fc) in mesh.fractures.iter().enumerate() {
        let measure = fc.cross_section * mesh.fracture_frame(cell)?.length;
        let row = dofs.fracture_pressure(cell);
        storage.add(row, row, params.fracture.storativity * measure);
        stabilization.add(row, row, params.fracture_stabilization() * measure);
    }
    Ok((storage.build(), stabilization.build()))
}

/// Sign of the face {a, b} seen from a counterclockwise triangle: +1 when the
/// face's global direction points out of the triangle.
pub(crate) fn face_sign_in_triangle<T: Real>(
    mesh: &MixedDimMesh<T>,
    triangle: usize,
    pair: [usize; 2],
) -> Option<i8> {
    let tri = mesh.triangles[triangle];
    for i in 0..3 {
        let u = tri[i];
        let w = tri[(i + 1) % 3];
        if (u == pair[0] && w == pair[1]) || (u == pair[1] && w == pair[0]) {
            return Some(if u < w { -1 } else { 1 });
        }
    }
    None
}

pub(crate) fn face_of<T: Real>(
    mesh: &MixedDimMesh<T>,
    pair: [usize; 2],
) -> Result<usize, AssemblyError> {
    mesh.face_id(pair[0], pair[1]).ok_or_else(|| {
        AssemblyError::Mesh(MeshError::Geometry(format!(
            "node pair ({}, {}) is not a face",
            pair[0], pair[1]
        )))
    })
}

/// Assembles the divergence form, pressure rows over flux columns: the net
/// outflow of each matrix and fracture cell. Wall faces appear twice, as
/// outflow of their triangle and inflow of their fracture cell.
pub fn assemble_divergence<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
) -> Result<SparseMatrix<T>, AssemblyError> {
    let mut builder = SparseBuilder::new(dofs.n_pressure(), dofs.n_flux());
    for cell in 0..mesh.n_triangles() {
        let tri = mesh.triangles[cell];
        let row = dofs.matrix_pressure(cell);
        for i in 0..3 {
            let pair = [tri[(i + 1) % 3], tri[(i + 2) % 3]];
            let face = face_of(mesh, pair)?;
            let sign = face_sign_in_triangle(mesh, cell, pair)
                .expect("triangle contains its own faces");
            builder.add(row, dofs.face_flux(face), T::of(sign as f64));
        }
    }
    for (cell, fc) in mesh.fractures.iter().enumerate() {
        let frame = mesh.fracture_frame(cell)?;
        let row = dofs.fracture_pressure(cell);
        for (wall, triangle) in [
            (fc.plus_wall, frame.plus_triangle),
            (fc.minus_wall, frame.minus_triangle),
        ] {
            let face = face_of(mesh, wall)?;
            let sign = face_sign_in_triangle(mesh, triangle, wall)
                .expect("wall triangles contain their wall face");
            // what leaves the triangle enters the fracture
            builder.add(row, dofs.face_flux(face), -T::of(sign as f64));
        }
        for end in 0..2 {
            let outflow = if end == 0 { -T::one() } else { T::one() };
            for &(dof, coeff) in &dofs.discharges[cell][end] {
                builder.add(row, dof, outflow * coeff);
            }
        }
    }
    Ok(builder.build())
}

/// Assembles the flux mass form weighted by inverse conductivities: RT0 mass
/// per triangle, lumped tangential mass per fracture cell, and the exchange
/// resistance δ/(2 k_f |E|) on each wall unknown, which realizes the
/// interface law v·ν = (2 k_f/δ)(p_m − p_f) of the reduced model.
pub fn assemble_darcy<T: Real>(
    mesh: &MixedDimMesh<T>,
    dofs: &DofMap<T>,
    params: &HmParameters<T>,
    state: &FractureState<T>,
) -> Result<SparseMatrix<T>, AssemblyError> {
    params.validate()?;
    let n = dofs.n_flux();
    let mut builder = SparseBuilder::new(n, n);
    let third = T::of(1.0 / 3.0);
    let half = T::of(0.5);

    for cell in 0..mesh.n_triangles() {
        let conductivity = params.matrix_conductivity(mesh, cell)?;
        if !(conductivity > T::zero()) {
            return Err(AssemblyError::InvalidParameters(format!(
                "triangle {cell} has a nonpositive conductivity"
            )));
        }
        let tri = mesh.triangles[cell];
        let p: Vec<[T; 2]> = tri.iter().map(|&n| mesh.nodes[n]).collect();
        let area = mesh.triangle_area(cell)?;
        let two_a = area * T::of(2.0);
        let mut faces = [0usize; 3];
        let mut signs = [T::zero(); 3];
        for i in 0..3 {
            let pair = [tri[(i + 1) % 3], tri[(i + 2) % 3]];
            faces[i] = face_of(mesh, pair)?;
            signs[i] = T::of(face_sign_in_triangle(mesh, cell, pair).unwrap() as f64);
        }
        let midpoints = [
            [(p[0][0] + p[1][0]) * half, (p[0][1] + p[1][1]) * half],
            [(p[1][0] + p[2][0]) * half, (p[1][1] + p[2][1]) * half],
            [(p[2][0] + p[0][0]) * half, (p[2][1] + p[0][1]) * half],
        ];
        // (x − vᵢ)/2A carries unit total flux out through the face across vᵢ
        let weight = area * third / conductivity;
        for i in 0..3 {
            for j in 0..3 {
                let mut value = T::zero();
                for m in &midpoints {
                    let bi = [(m[0] - p[i][0]) / two_a, (m[1] - p[i][1]) / two_a];
                    let bj = [(m[0] - p[j][0]) / two_a, (m[1] - p[j][1]) / two_a];
                    value += bi[0] * bj[0] + bi[1] * bj[1];
                }
                builder.add(
                    dofs.face_flux(faces[i]),
                    dofs.face_flux(faces[j]),
                    signs[i] * signs[j] * weight * value,
                );
            }
        }
    }

    for (cell, fc) in mesh.fractures.iter().enumerate() {
        let aperture = state.apertures[cell];
        let conductivity = state.conductivities[cell];
        if !(aperture > T::zero() && conductivity > T::zero()) {
            return Err(AssemblyError::NonpositiveAperture { cell });
        }
        let frame = mesh.fracture_frame(cell)?;
        let length = frame.length;
        // tangential discharge mass: P1 end values over the cell, resistance
        // 1/(k_f a) per unit length of unit discharge
        let mass = length / (T::of(6.0) * conductivity * aperture);
        for end_i in 0..2 {
            for end_j in 0..2 {
                let local = if end_i == end_j { T::of(2.0) } else { T::one() };
                for &(di, ci) in &dofs.discharges[cell][end_i] {
                    for &(dj, cj) in &dofs.discharges[cell][end_j] {
                        builder.add(di, dj, mass * local * ci * cj);
                    }
                }
            }
        }
        // exchange resistance across each half cross-section
        let resistance = fc.cross_section / (T::of(2.0) * conductivity * length);
        for wall in [fc.plus_wall, fc.minus_wall] {
            let dof = dofs.face_flux(face_of(mesh, wall)?);
            builder.add(dof, dof, resistance);
        }
    }

    Ok(builder.build())
}
