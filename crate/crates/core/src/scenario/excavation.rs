//! Conductivity of the rock around an advancing excavation.
//!
//! Drilling damages the rock near the hole wall, raising its hydraulic
//! conductivity by orders of magnitude. The model is a radial profile around
//! the hole axis: fully damaged within a band at the wall, intact beyond a
//! transition distance, exponential in between with the two coefficients
//! pinned by continuity at both ends. The profile only applies to the part of
//! the domain the front has already passed; everything ahead of it is intact.

use crate::mesh::MixedDimMesh;
use crate::Real;

use super::ScenarioError;

/// Radial conductivity profile around a hole excavated along the first
/// coordinate axis at constant speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcavationModel<T> {
    /// front position per second of simulated time (m/s)
    pub front_speed: T,
    /// axial extent of the hole (m); the front stops here
    pub length: T,
    /// the hole axis is the line x₂ = axis_level
    pub axis_level: T,
    /// hole radius (m)
    pub radius: T,
    /// the damage band reaches from the axis to radius + transition_start
    pub transition_start: T,
    /// the rock is intact beyond radius + transition_end
    pub transition_end: T,
    /// conductivity of undisturbed rock (m/s)
    pub intact_conductivity: T,
    /// conductivity of fully damaged rock at the hole wall (m/s)
    pub damaged_conductivity: T,
}

impl<T: Real> ExcavationModel<T> {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.intact_conductivity > T::zero()) || !(self.damaged_conductivity > T::zero()) {
            return Err(ScenarioError::Config(
                "excavation: both conductivities must be positive".into(),
            ));
        }
        if !(self.transition_start < self.transition_end) {
            return Err(ScenarioError::Config(format!(
                "excavation: transition_start ({}) must be smaller than transition_end ({})",
                self.transition_start, self.transition_end
            )));
        }
        if !(self.transition_start >= T::zero()) || !(self.radius >= T::zero()) {
            return Err(ScenarioError::Config(
                "excavation: radius and transition_start must be nonnegative".into(),
            ));
        }
        if !(self.front_speed > T::zero()) || !(self.length > T::zero()) {
            return Err(ScenarioError::Config(
                "excavation: front_speed and length must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Exponential rate of the transition branch, ln(k₀/k₁)/(end − start).
    pub fn transition_rate(&self) -> T {
        (self.intact_conductivity / self.damaged_conductivity).ln()
            / (self.transition_end - self.transition_start)
    }

    /// Scale of the transition branch, pinned so the branch meets the damaged
    /// plateau at radius + transition_start.
    pub fn transition_scale(&self) -> T {
        self.damaged_conductivity
            * (-self.transition_rate() * (self.radius + self.transition_start)).exp()
    }

    /// The radial profile without the front gate.
    pub fn profile(&self, r: T) -> T {
        if r <= self.radius + self.transition_start {
            self.damaged_conductivity
        } else if r >= self.radius + self.transition_end {
            self.intact_conductivity
        } else {
            self.transition_scale() * (self.transition_rate() * r).exp()
        }
    }

    /// Axial reach of the damage zone at `time`.
    pub fn front_position(&self, time: T) -> T {
        (self.front_speed * time).min(self.length).max(T::zero())
    }

    /// Conductivity at a point: the radial profile where the front has
    /// already passed, intact rock everywhere else.
    pub fn conductivity(&self, position: [T; 2], time: T) -> T {
        let axial = position[0];
        if axial <= T::zero() || axial >= self.front_position(time) {
            return self.intact_conductivity;
        }
        self.profile((position[1] - self.axis_level).abs())
    }

    /// Per-triangle conductivity override, evaluated at cell centroids.
    pub fn field(&self, mesh: &MixedDimMesh<T>, time: T) -> Vec<T> {
        (0..mesh.n_triangles())
            .map(|t| self.conductivity(mesh.triangle_centroid(t), time))
            .collect()
    }
}
