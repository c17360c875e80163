//! Desk-scale simulator of randomized adiabatic state preparation with
//! Hadamard-test energy readout on small Pauli Hamiltonians.
//!
//! The library covers the full pipeline: Pauli algebra and the text
//! Hamiltonian format ([`pauli`]), Jordan-Wigner encoding ([`jw`]),
//! interaction-norm reduction by particle-number shifts ([`shift`]),
//! Poisson-randomized time evolution ([`sampler`]), the controlled
//! readout-circuit IR with its reduction passes ([`circuit`]), exact and
//! noisy backends ([`sim`]), post-selection and the arctan energy
//! estimator ([`estimate`]), cost baselines ([`baselines`]), and the
//! experiment driver ([`pipeline`]). The bundled six-qubit molecular
//! Hamiltonian lives in [`data`].

pub mod baselines;
pub mod circuit;
pub mod data;
pub mod dense;
pub mod estimate;
pub mod jw;
pub mod pauli;
pub mod pipeline;
pub mod sampler;
pub mod schedule;
pub mod shift;
pub mod sim;
