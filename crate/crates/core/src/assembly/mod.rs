//! Finite element operators for the coupled problem.
//!
//! Displacements are vector P1 on the duplicated-node matrix mesh plus P1 on
//! fracture nodes; pressures are P0 per matrix and fracture cell; fluxes are
//! RT0 per matrix face together with nodal tangential discharges along each
//! fracture. The wall faces of a fracture cell double as its two exchange
//! fluxes: the RT0 unknown on a wall is the flow leaving the adjacent
//! triangle into the fracture, which keeps interface mass continuity exact
//! without extra constraints.
//!
//! Matrix and fracture integrals of the elasticity, coupling and storage
//! forms are weighted by the initial cross-section δ; the Darcy form uses the
//! current aperture through the cubic-law conductivity, so all displacement
//! dependence of the flow system sits in that one matrix.

mod contact;
mod dofs;
mod flow;
mod mechanics;
mod rhs;

pub use contact::{assemble_contact, ContactConstraints};
pub use dofs::{build_dofs, DischargeExpansion, DofMap, FixedDisplacement, FixedFlux};
pub use flow::{
    assemble_darcy, assemble_divergence, assemble_storage, update_fracture_state, FractureState,
};
pub use mechanics::{assemble_coupling, assemble_elasticity};
pub use rhs::{assemble_rhs, boundary_values, BoundaryValues};

use crate::linalg::SparseMatrix;
use crate::mesh::{BoundaryTag, MeshError, MixedDimMesh};
use crate::Real;

#[derive(Debug, thiserror::Error)]
pub enum AssemblyError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("boundary tag {name:?} has no definition")]
    UnknownTag { name: String },
    #[error("fracture cell {cell} has a nonpositive aperture")]
    NonpositiveAperture { cell: usize },
    #[error("fracture cell {cell} rest cross-section lies below the minimum")]
    InfeasibleRest { cell: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Poroelastic parameters of one matrix material region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionParameters<T> {
    pub youngs_modulus: T,
    pub poisson_ratio: T,
    /// Biot–Willis coefficient
    pub biot_coefficient: T,
    /// storativity (1/s)
    pub storativity: T,
    /// hydraulic conductivity (m/s)
    pub conductivity: T,
}

/// Parameters shared by the whole fracture network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractureParameters<T> {
    pub youngs_modulus: T,
    pub poisson_ratio: T,
    pub biot_coefficient: T,
    pub storativity: T,
    /// roughness coefficient of the cubic law, in (0, 1]
    pub roughness: T,
    /// fluid dynamic viscosity (Pa·s)
    pub viscosity: T,
    /// fluid density (kg/m³)
    pub fluid_density: T,
    /// gravitational acceleration (m/s²)
    pub gravity: T,
    /// smallest admissible aperture (m)
    pub min_cross_section: T,
}

impl<T: Real> FractureParameters<T> {
    /// Cubic-law prefactor ηϱg/(12μ), so k_f = transmissivity_factor · a².
    pub fn transmissivity_factor(&self) -> T {
        self.roughness * self.fluid_density * self.gravity / (T::of(12.0) * self.viscosity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HmParameters<T> {
    /// matrix materials, indexed by the mesh's triangle regions
    pub regions: Vec<RegionParameters<T>>,
    pub fracture: FractureParameters<T>,
    /// initial stress (σxx, σyy, σxy), applied in matrix and fracture cells
    pub initial_stress: [T; 3],
    /// ϱg conversion between pressure and pressure head; 1 keeps both equal
    pub head_scale: T,
    /// body force per unit volume, matrix and fractures alike
    pub body_force: [T; 2],
    /// uniform fluid sources (1/s)
    pub matrix_source: T,
    pub fracture_source: T,
    /// per-triangle conductivity replacing the region value when present
    pub conductivity_override: Option<Vec<T>>,
}

impl<T: Real> HmParameters<T> {
    pub fn validate(&self) -> Result<(), AssemblyError> {
        if self.regions.is_empty() {
            return Err(AssemblyError::InvalidParameters("no material regions".into()));
        }
        let half = T::of(0.5);
        let elastic = |e: T, nu: T, alpha: T, s: T, what: &str| {
            if !(e > T::zero()) {
                return Err(AssemblyError::InvalidParameters(format!(
                    "{what}: Young's modulus must be positive"
                )));
            }
            if !(nu > -T::one() && nu < half) {
                return Err(AssemblyError::InvalidParameters(format!(
                    "{what}: Poisson ratio must lie in (-1, 0.5)"
                )));
            }
            if !(alpha >= T::zero() && alpha <= T::one()) {
                return Err(AssemblyError::InvalidParameters(format!(
                    "{what}: Biot coefficient must lie in [0, 1]"
                )));
            }
            if !(s >= T::zero()) {
                return Err(AssemblyError::InvalidParameters(format!(
                    "{what}: storativity must be nonnegative"
                )));
            }
            Ok(())
        };
        for (i, r) in self.regions.iter().enumerate() {
            elastic(
                r.youngs_modulus,
                r.poisson_ratio,
                r.biot_coefficient,
                r.storativity,
                &format!("region {i}"),
            )?;
            if !(r.conductivity > T::zero()) {
                return Err(AssemblyError::InvalidParameters(format!(
                    "region {i}: conductivity must be positive"
                )));
            }
        }
        let f = &self.fracture;
        elastic(
            f.youngs_modulus,
            f.poisson_ratio,
            f.biot_coefficient,
            f.storativity,
            "fracture set",
        )?;
        if !(f.roughness > T::zero() && f.roughness <= T::one()) {
            return Err(AssemblyError::InvalidParameters(
                "fracture set: roughness must lie in (0, 1]".into(),
            ));
        }
        if !(f.viscosity > T::zero()) {
            return Err(AssemblyError::InvalidParameters(
                "fracture set: viscosity must be positive".into(),
            ));
        }
        if !(f.min_cross_section > T::zero()) {
            return Err(AssemblyError::InvalidParameters(
                "fracture set: minimal cross-section must be positive".into(),
            ));
        }
        if !(f.fluid_density >= T::zero() && f.gravity >= T::zero()) {
            return Err(AssemblyError::InvalidParameters(
                "fracture set: density and gravity must be nonnegative".into(),
            ));
        }
        if !(self.head_scale > T::zero()) {
            return Err(AssemblyError::InvalidParameters(
                "head scale must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn region(&self, index: usize) -> Result<&RegionParameters<T>, AssemblyError> {
        self.regions.get(index).ok_or_else(|| {
            AssemblyError::InvalidParameters(format!("no parameters for material region {index}"))
        })
    }

    pub fn matrix_conductivity(&self, mesh: &MixedDimMesh<T>, cell: usize) -> Result<T, AssemblyError> {
        if let Some(values) = &self.conductivity_override {
            values.get(cell).copied().ok_or_else(|| {
                AssemblyError::InvalidParameters(
                    "conductivity override shorter than the triangle list".into(),
                )
            })
        } else {
            Ok(self.region(mesh.triangle_regions[cell])?.conductivity)
        }
    }

    /// Fixed-stress stabilization coefficient ϱg·α²(1+ν)(1−2ν)/E for a
    /// matrix region; the head scale converts the compliance from pressure
    /// to head units.
    pub fn matrix_stabilization(&self, region: usize) -> Result<T, AssemblyError> {
        let r = self.region(region)?;
        Ok(stabilization(
            r.biot_coefficient,
            r.poisson_ratio,
            r.youngs_modulus,
            self.head_scale,
        ))
    }

    pub fn fracture_stabilization(&self) -> T {
        stabilization(
            self.fracture.biot_coefficient,
            self.fracture.poisson_ratio,
            self.fracture.youngs_modulus,
            self.head_scale,
        )
    }
}

fn stabilization<T: Real>(alpha: T, nu: T, e: T, head_scale: T) -> T {
    let one = T::one();
    let two = T::of(2.0);
    head_scale * alpha * alpha * (one + nu) * (one - two * nu) / e
}

/// Lamé coefficients (λ, μ) of plane strain.
pub(crate) fn lame<T: Real>(youngs_modulus: T, poisson_ratio: T) -> (T, T) {
    let one = T::one();
    let two = T::of(2.0);
    let lambda = youngs_modulus * poisson_ratio
        / ((one + poisson_ratio) * (one - two * poisson_ratio));
    let mu = youngs_modulus / (two * (one + poisson_ratio));
    (lambda, mu)
}

/// All matrices and vectors of one time step's linear systems.
pub struct FormMatrices<T> {
    /// elasticity (displacement × displacement)
    pub stiffness: SparseMatrix<T>,
    /// pressure–displacement coupling (pressure rows × displacement columns)
    pub coupling: SparseMatrix<T>,
    /// storage (pressure diagonal)
    pub storage: SparseMatrix<T>,
    /// fixed-stress stabilization (pressure diagonal)
    pub stabilization: SparseMatrix<T>,
    /// divergence (pressure rows × flux columns)
    pub divergence: SparseMatrix<T>,
    /// weighted Darcy mass (flux × flux), depends on the fracture state
    pub darcy: SparseMatrix<T>,
    pub mech_rhs: Vec<T>,
    pub source_rhs: Vec<T>,
    pub flux_rhs: Vec<T>,
}

impl<T: Real> FormMatrices<T> {
    /// Assembles every form at the given time and fracture state.
    pub fn assemble(
        mesh: &MixedDimMesh<T>,
        dofs: &DofMap<T>,
        params: &HmParameters<T>,
        tags: &[BoundaryTag<T>],
        state: &FractureState<T>,
        time: T,
    ) -> Result<Self, AssemblyError> {
        let (stiffness, _) = assemble_elasticity(mesh, dofs, params)?;
        let (storage, stabilization) = assemble_storage(mesh, dofs, params)?;
        let (mech_rhs, source_rhs, flux_rhs) = assemble_rhs(mesh, dofs, params, tags, time)?;
        Ok(FormMatrices {
            stiffness,
            coupling: assemble_coupling(mesh, dofs, params)?,
            storage,
            stabilization,
            divergence: assemble_divergence(mesh, dofs)?,
            darcy: assemble_darcy(mesh, dofs, params, state)?,
            mech_rhs,
            source_rhs,
            flux_rhs,
        })
    }
}

/// Local P1 data of a triangle: area and the constant basis gradients.
pub(crate) struct TriangleFrame<T> {
    pub area: T,
    pub gradients: [[T; 2]; 3],
}

pub(crate) fn triangle_frame<T: Real>(mesh: &MixedDimMesh<T>, cell: usize) -> TriangleFrame<T> {
    let tri = mesh.triangles[cell];
    let p: Vec<[T; 2]> = tri.iter().map(|&n| mesh.nodes[n]).collect();
    let area = ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
        - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
        * T::of(0.5);
    let two_a = area * T::of(2.0);
    let mut gradients = [[T::zero(); 2]; 3];
    for i in 0..3 {
        let e = [
            p[(i + 2) % 3][0] - p[(i + 1) % 3][0],
            p[(i + 2) % 3][1] - p[(i + 1) % 3][1],
        ];
        gradients[i] = [-e[1] / two_a, e[0] / two_a];
    }
    TriangleFrame { area, gradients }
}
