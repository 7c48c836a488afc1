//! Desk-scale coupled hydro-mechanical simulation of fractured poroelastic
//! media in two dimensions.
//!
//! The matrix rock is a linear poroelastic continuum; fractures are
//! lower-dimensional inclusions carrying their own displacement, pressure and
//! flux unknowns. Non-penetration of fracture walls is enforced as a linear
//! inequality constraint on displacements, solved by dualizing the mechanics
//! energy minimization and running an active-set gradient projection solver
//! (MPGP) on the small dual problem. Flow and mechanics are coupled by a
//! fixed-stress iterative split, so each time step alternates a contact
//! mechanics solve with a mixed Darcy flow solve until the increments drop
//! below tolerance.
//!
//! Module map:
//! - [`linalg`]: CSR sparse matrices, sparse Cholesky and LU, CG, power
//!   iteration, Matrix Market import/export.
//! - [`qp`]: box-constrained quadratic programs, the MPGP solver, and the
//!   dualization of inequality-constrained QPs.
//! - [`mesh`]: mixed-dimensional meshes (triangles plus embedded fracture
//!   segments), a rectangle-grid generator, an ASCII exchange format.
//! - [`assembly`]: finite element operators (P1 displacements, P0 pressures,
//!   RT0 fluxes) including the fracture exchange terms and the contact
//!   constraint rows.
//! - [`coupling`]: time stepping and the fixed-stress splitting loop.
//! - [`scenario`]: configuration files, built-in scenarios, the excavation
//!   conductivity model, observation records and field output.
//!
//! All computations are generic over the floating point scalar through
//! [`Real`]; concrete f64 aliases for the main entry types live at the crate
//! root.

pub mod assembly;
pub mod coupling;
pub mod linalg;
pub mod mesh;
pub mod qp;
mod scalar;
pub mod scenario;

pub use scalar::Real;

/// CSR sparse matrix over f64, the workhorse type of the simulator.
pub type SparseMatrixF64 = linalg::SparseMatrix<f64>;

/// Mixed-dimensional mesh over f64.
pub type MeshF64 = mesh::MixedDimMesh<f64>;

/// Assembled operators of the coupled problem over f64.
pub type FormMatricesF64 = assembly::FormMatrices<f64>;

/// Full simulation state over f64.
pub type SimulationStateF64 = coupling::SimulationState<f64>;
