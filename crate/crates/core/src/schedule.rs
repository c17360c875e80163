//! Sweep schedules for the interpolating Hamiltonian H(u) = H_Z + w(u)·H_I.

use serde::{Deserialize, Serialize};

/// w(u) on [0, 1] together with its integral z(u) = ∫₀ᵘ w and the inverse
/// of z. The sampler only needs w through z and z⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepSchedule {
    /// w(u) = u: z(u) = u²/2, ζ = 1/2.
    Linear,
    /// w ≡ 1: z(u) = u, ζ = 1.
    Constant,
}

impl SweepSchedule {
    pub fn w(&self, u: f64) -> f64 {
        match self {
            SweepSchedule::Linear => u,
            SweepSchedule::Constant => 1.0,
        }
    }

    pub fn z(&self, u: f64) -> f64 {
        match self {
            SweepSchedule::Linear => u * u / 2.0,
            SweepSchedule::Constant => u,
        }
    }

    pub fn z_inverse(&self, y: f64) -> f64 {
        match self {
            SweepSchedule::Linear => (2.0 * y).sqrt(),
            SweepSchedule::Constant => y,
        }
    }

    /// ζ = z(1).
    pub fn zeta(&self) -> f64 {
        self.z(1.0)
    }
}
