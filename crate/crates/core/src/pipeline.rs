//! End-to-end experiment orchestration: ensemble generation, backend
//! execution, and post-processing, shared by the command-line driver and
//! the verification suites.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    build_ensemble, standard_passes, CircuitMeta, OccupationProfile, StitchedPair,
};
use crate::estimate::{
    accumulate_curve, estimate_energy, reduce_exact, reduce_shots, CurvePoint, EnergyEstimate,
    EstimateError, ExactExpectation, PostSelectMode, RhoEstimate, TrialEnergies,
};
use crate::pauli::PauliHamiltonian;
use crate::sampler::{derive_seed, expected_circuit_tqg, stream_rng};
use crate::shift::{split, SplitHamiltonian};
use crate::sim::statevec::run_exact;
use crate::sim::{NoiseModel, ShotRecord, SimError};

/// Inputs of one simulated experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub t_sweep: f64,
    pub tau: f64,
    pub trial: TrialEnergies,
    pub n_circuits: usize,
    pub shots_per_circuit: usize,
    pub master_seed: u64,
}

/// Generated circuits with the reduction passes applied, plus per-circuit
/// metadata for the estimator.
pub struct Ensemble {
    pub pairs: Vec<StitchedPair>,
    pub metas: Vec<CircuitMeta>,
    pub profile: OccupationProfile,
}

/// Build and reduce the paired ensemble for a Hamiltonian and reference
/// state.
pub fn generate(
    h: &PauliHamiltonian,
    hf_bits: u64,
    params: &ExperimentParams,
) -> Ensemble {
    let s = split(h);
    let profile = OccupationProfile::from_bits(hf_bits, h.qubit_count());
    let mut pairs = build_ensemble(
        &s,
        h.identity_offset(),
        params.t_sweep,
        params.tau,
        &params.trial,
        &profile,
        params.n_circuits,
        params.master_seed,
    );
    pairs.par_iter_mut().for_each(|p| {
        p.plus = standard_passes(&p.plus, &profile).expect("hamiltonian strings conserve parity");
        p.minus = standard_passes(&p.minus, &profile).expect("hamiltonian strings conserve parity");
    });
    let metas = pairs.iter().map(|p| p.plus.meta).collect();
    Ensemble { pairs, metas, profile }
}

/// Exact per-circuit expectations (the infinite-shot limit).
pub fn exact_expectations(ensemble: &Ensemble) -> Result<Vec<ExactExpectation>, SimError> {
    ensemble
        .pairs
        .par_iter()
        .map(|p| {
            let plus = run_exact(&p.plus)?;
            let minus = run_exact(&p.minus)?;
            Ok(vec![plus.expectations(&p.plus), minus.expectations(&p.minus)])
        })
        .collect::<Result<Vec<_>, SimError>>()
        .map(|v| v.into_concat())
}

trait Concat<T> {
    fn into_concat(self) -> Vec<T>;
}

impl<T> Concat<T> for Vec<Vec<T>> {
    fn into_concat(self) -> Vec<T> {
        self.into_iter().flatten().collect()
    }
}

/// Finite-shot sampling from the exact Born distributions.
pub fn exact_shots(
    ensemble: &Ensemble,
    shots: usize,
    master_seed: u64,
) -> Result<Vec<ShotRecord>, SimError> {
    ensemble
        .pairs
        .par_iter()
        .map(|p| {
            let mut out = Vec::with_capacity(2 * shots);
            for (slot, c) in [(4u64, &p.plus), (5u64, &p.minus)] {
                let run = run_exact(c)?;
                let mut rng = stream_rng(master_seed, c.meta.circuit_index as u64 * 8 + slot, 1);
                out.extend(run.sample_shots(c, shots, &mut rng));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, SimError>>()
        .map(|v| v.into_concat())
}

/// Exact noisy expectations through the density backend. The minus branch
/// reuses the plus-branch evolution, shifted by the branch phase.
pub fn density_expectations(
    ensemble: &Ensemble,
    nm: &NoiseModel,
) -> Result<Vec<ExactExpectation>, SimError> {
    ensemble
        .pairs
        .par_iter()
        .map(|p| {
            let plus = crate::sim::density::run_density(&p.plus, nm)?;
            let meta = &p.plus.meta;
            let delta = meta.s_central
                * (p.minus.meta.trial_energy - meta.trial_energy)
                * meta.direction_sign as f64;
            let minus = plus.with_extra_ancilla_phase(delta);
            Ok(vec![plus.expectations(&p.plus), minus.expectations(&p.minus)])
        })
        .collect::<Result<Vec<_>, SimError>>()
        .map(|v| v.into_concat())
}

/// Leakage-trajectory shots for one repetition of the experiment.
pub fn leakage_shots(
    ensemble: &Ensemble,
    nm: &NoiseModel,
    shots: usize,
    rep_seed: u64,
) -> Result<Vec<ShotRecord>, SimError> {
    ensemble
        .pairs
        .par_iter()
        .map(|p| {
            let mut out = Vec::with_capacity(2 * shots);
            for (slot, c) in [(6u64, &p.plus), (7u64, &p.minus)] {
                let mut rng = stream_rng(rep_seed, c.meta.circuit_index as u64 * 8 + slot, 2);
                out.extend(crate::sim::leakage::run_leakage(c, nm, shots, &mut rng)?);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, SimError>>()
        .map(|v| v.into_concat())
}

/// Reduce records and estimate the energy in one step.
pub fn estimate_from_shots(
    records: &[ShotRecord],
    mode: PostSelectMode,
    ensemble: &Ensemble,
    trial: &TrialEnergies,
) -> Result<(RhoEstimate, EnergyEstimate), EstimateError> {
    let rho = reduce_shots(records, mode, &ensemble.metas)?;
    let e = estimate_energy(&rho, trial)?;
    Ok((rho, e))
}

pub fn estimate_from_exact(
    values: &[ExactExpectation],
    mode: PostSelectMode,
    ensemble: &Ensemble,
    trial: &TrialEnergies,
) -> Result<(RhoEstimate, EnergyEstimate), EstimateError> {
    let rho = reduce_exact(values, mode, &ensemble.metas)?;
    let e = estimate_energy(&rho, trial)?;
    Ok((rho, e))
}

pub fn curve(
    rho: &RhoEstimate,
    trial: &TrialEnergies,
) -> Vec<CurvePoint> {
    accumulate_curve(rho, trial)
}

/// Normalized ensemble-average states: (Σᵢ U₁ᵢ|HF>)/‖·‖ and the
/// corresponding average over the adjoints of the reverse draws.
pub fn average_prepared_states(
    split: &SplitHamiltonian,
    ensemble: &Ensemble,
    hf_bits: u64,
) -> (Vec<num_complex::Complex64>, Vec<num_complex::Complex64>) {
    use num_complex::Complex64;
    let l = split.qubit_count();
    let dim = 1usize << l;
    let zero = vec![Complex64::default(); dim];
    let add = |mut acc: Vec<Complex64>, x: Vec<Complex64>| {
        for (a, b) in acc.iter_mut().zip(&x) {
            *a += b;
        }
        acc
    };
    let (mut fwd, mut rev) = ensemble
        .pairs
        .par_iter()
        .map(|p| {
            let mut psi1 = crate::sim::statevec::basis_state(l, hf_bits);
            crate::sim::statevec::evolve_sampled(&p.shared_draws.u1, split, &mut psi1);
            // (U₁')† |HF>: the reverse draw's adjoint is its forward reading
            let mut forward_of_rev = p.shared_draws.u1p.clone();
            forward_of_rev.config.direction = crate::sampler::Direction::Forward;
            for ev in forward_of_rev.events.iter_mut() {
                ev.rotation_sign = -ev.rotation_sign;
            }
            let mut psi2 = crate::sim::statevec::basis_state(l, hf_bits);
            crate::sim::statevec::evolve_sampled(&forward_of_rev, split, &mut psi2);
            (psi1, psi2)
        })
        .reduce(
            || (zero.clone(), zero.clone()),
            |(a1, a2), (b1, b2)| (add(a1, b1), add(a2, b2)),
        );
    for psi in [&mut fwd, &mut rev] {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            psi.iter_mut().for_each(|a| *a /= norm);
        }
    }
    (fwd, rev)
}

/// One row of the (s, τ) selection sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub s_central: f64,
    pub tau: f64,
    pub admissible: bool,
    pub expected_tqg: f64,
    /// Variance of the final energy estimate across seeds, Ha².
    pub variance: Option<f64>,
    pub mean_energy: Option<f64>,
}

/// Simulate mini noiseless ensembles over a grid of (s, τ) pairs and
/// record the spread of the final estimate. Pairs whose expected per-circuit
/// two-qubit-gate count exceeds `tqg_cap` are marked inadmissible and not
/// simulated.
#[allow(clippy::too_many_arguments)]
pub fn sweep_s_tau(
    h: &PauliHamiltonian,
    hf_bits: u64,
    trial_template: &TrialEnergies,
    t_sweep: f64,
    grid: &[(f64, f64)],
    tqg_cap: f64,
    n_circuits: usize,
    n_seeds: usize,
    shots: usize,
    master_seed: u64,
) -> Vec<SweepRow> {
    let s_ham = split(h);
    let costs = crate::circuit::GateCostModel::default();
    grid.iter()
        .map(|&(s_central, tau)| {
            let expected = expected_circuit_tqg(&s_ham, t_sweep, s_central, tau, &costs);
            if expected >= tqg_cap {
                return SweepRow {
                    s_central,
                    tau,
                    admissible: false,
                    expected_tqg: expected,
                    variance: None,
                    mean_energy: None,
                };
            }
            let trial = TrialEnergies::new(trial_template.e_guess, trial_template.epsilon, s_central);
            let energies: Vec<f64> = (0..n_seeds)
                .filter_map(|k| {
                    let seed = derive_seed(master_seed, (k as u64) << 16 | quantize(s_central, tau));
                    let params = ExperimentParams {
                        t_sweep,
                        tau,
                        trial,
                        n_circuits,
                        shots_per_circuit: shots,
                        master_seed: seed,
                    };
                    let ens = generate(h, hf_bits, &params);
                    let records = exact_shots(&ens, shots, seed).ok()?;
                    let (_, e) =
                        estimate_from_shots(&records, PostSelectMode::HfProjection, &ens, &trial)
                            .ok()?;
                    Some(e.value)
                })
                .collect();
            let (variance, mean) = if energies.len() >= 2 {
                let m = energies.iter().sum::<f64>() / energies.len() as f64;
                let v = energies.iter().map(|e| (e - m).powi(2)).sum::<f64>()
                    / (energies.len() as f64 - 1.0);
                (Some(v), Some(m))
            } else {
                (None, None)
            };
            SweepRow {
                s_central,
                tau,
                admissible: true,
                expected_tqg: expected,
                variance,
                mean_energy: mean,
            }
        })
        .collect()
}

fn quantize(s: f64, tau: f64) -> u64 {
    ((s * 1000.0).round() as u64) << 20 | ((tau * 100000.0).round() as u64)
}

/// Convenience: default experiment parameters matching the published run
/// (T = 8, s = 10, τ = 0.1, ε = 0.04, 346 circuits, 5 shots).
pub fn paper_params(e_hf: f64, master_seed: u64) -> ExperimentParams {
    ExperimentParams {
        t_sweep: 8.0,
        tau: 0.1,
        trial: TrialEnergies::hf_anchored(e_hf),
        n_circuits: 346,
        shots_per_circuit: 5,
        master_seed,
    }
}
