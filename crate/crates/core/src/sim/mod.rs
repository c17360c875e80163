//! Execution backends: exact statevector, density matrix with error
//! channels, and stochastic leakage trajectories, plus the exact
//! diagonalization and time-ordered-evolution references.

pub mod adiabatic;
pub mod compile;
pub mod density;
pub mod leakage;
pub mod statevec;

use serde::{Deserialize, Serialize};

use crate::circuit::TrialBranch;
use crate::dense::{self, CVector};
use crate::pauli::{AlgebraError, PauliHamiltonian};

/// Hardware noise rates per two-qubit gate (incoherent, coherent) and per
/// leakage opportunity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub lambda_incoh: f64,
    pub lambda_coh: f64,
    pub lambda_leak: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        // nominal trapped-ion rates
        Self { lambda_incoh: 9.7e-4, lambda_coh: 2.2e-4, lambda_leak: 0.0 }
    }
}

impl NoiseModel {
    pub const NOISELESS: NoiseModel =
        NoiseModel { lambda_incoh: 0.0, lambda_coh: 0.0, lambda_leak: 0.0 };

    pub fn validate(&self) -> Result<(), SimError> {
        for v in [self.lambda_incoh, self.lambda_coh, self.lambda_leak] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::BadNoiseRate(v));
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimError {
    #[error("dimension 2^{0} exceeds the dense bound")]
    DimensionTooLarge(usize),
    #[error("the density backend models leakage only through trajectories")]
    LeakageUnsupported,
    #[error("noise rate {0} outside [0, 1]")]
    BadNoiseRate(f64),
}

/// One measurement outcome of one circuit execution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    /// Ancilla Y-basis outcome, ±1. The readout bit is 1 exactly for +1.
    pub ancilla_y: i8,
    pub physical_bits: u64,
    pub l_physical: usize,
    pub circuit_index: u32,
    pub trial_branch: TrialBranch,
    pub direction_sign: i8,
    /// Qubits that leaked during the run (simulation diagnostic).
    pub leaked_mask: u64,
}

/// Lowest eigenpair of the dense Hamiltonian over the full Hilbert space.
pub fn exact_ground_state(h: &PauliHamiltonian) -> Result<(f64, CVector), AlgebraError> {
    dense::ground_state(h)
}

/// Lowest eigenpair restricted to the per-spin particle sector of
/// `reference_bits`. For a number-conserving Hamiltonian this is the
/// physically prepared ground state; the global minimum of a
/// norm-shifted Hamiltonian generally lives in a different sector.
pub fn exact_ground_state_in_sector(
    h: &PauliHamiltonian,
    reference_bits: u64,
    ordering: crate::pauli::SpinOrdering,
) -> Result<(f64, CVector), AlgebraError> {
    let l = h.qubit_count();
    let mask = |spin: usize| {
        ordering.sector_qubits(spin, l).iter().fold(0u64, |m, &q| m | (1 << q))
    };
    dense::ground_state_in_sector(h, reference_bits, &[mask(0), mask(1)])
}
