//! Stochastic pure-state trajectories with leakage events.
//!
//! Before each two-qubit piece a leakage event fires with probability
//! λ_leak; one of the two operands (chosen uniformly) leaves the
//! computational subspace. The leaked qubit is projected out destructively,
//! every later operation touching it is removed, and its readout is forced
//! to 1 (for the ancilla, Y-outcome +1). The incoherent and coherent
//! channels run stochastically (uniform two-qubit Pauli twirl, Bernoulli
//! R_Z or R_Z† with equal odds per qubit per layer) so a trajectory stays
//! a pure state.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::Circuit;
use crate::sim::compile::{compile, Piece};
use crate::sim::statevec::basis_state;
use crate::sim::{NoiseModel, ShotRecord, SimError};

fn apply_single_pauli(psi: &mut [Complex64], q: usize, pauli: u8) {
    let bit = 1usize << q;
    match pauli {
        0 => {}
        1 => {
            // X
            for i in 0..psi.len() {
                if i & bit == 0 {
                    psi.swap(i, i | bit);
                }
            }
        }
        2 => {
            // Y
            let pi = Complex64::new(0.0, 1.0);
            let mi = Complex64::new(0.0, -1.0);
            for i in 0..psi.len() {
                if i & bit == 0 {
                    let (a, b) = (psi[i], psi[i | bit]);
                    psi[i] = mi * b;
                    psi[i | bit] = pi * a;
                }
            }
        }
        _ => {
            // Z
            for (i, amp) in psi.iter_mut().enumerate() {
                if i & bit != 0 {
                    *amp = -*amp;
                }
            }
        }
    }
}

fn apply_rz_kick(psi: &mut [Complex64], q: usize, sign: f64) {
    // R_Z = exp(-iπZ/8) or its adjoint
    let bit = 1usize << q;
    let lo = Complex64::from_polar(1.0, -sign * std::f64::consts::FRAC_PI_8);
    let hi = lo.conj();
    for (i, amp) in psi.iter_mut().enumerate() {
        *amp *= if i & bit == 0 { lo } else { hi };
    }
}

/// Project qubit q onto a Born-sampled basis outcome and renormalize.
fn project_out<R: Rng>(psi: &mut [Complex64], q: usize, rng: &mut R) {
    let bit = 1usize << q;
    let p1: f64 = psi
        .iter()
        .enumerate()
        .filter(|(i, _)| i & bit != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    let keep_one = rng.gen_range(0.0..1.0) < p1;
    let mut norm = 0.0;
    for (i, amp) in psi.iter_mut().enumerate() {
        if (i & bit != 0) != keep_one {
            *amp = Complex64::default();
        } else {
            norm += amp.norm_sqr();
        }
    }
    let norm = norm.sqrt();
    if norm > 0.0 {
        psi.iter_mut().for_each(|a| *a /= norm);
    }
}

/// Run one trajectory and measure.
fn trajectory<R: Rng>(
    circuit: &Circuit,
    pieces: &[Piece],
    nm: &NoiseModel,
    rng: &mut R,
) -> ShotRecord {
    let n = circuit.l_physical + 1;
    let ancilla = circuit.ancilla_index();
    let mut psi = basis_state(n, circuit.meta.hf_bits);
    let mut leaked: u64 = 0;
    for piece in pieces {
        if (0..n).any(|q| leaked >> q & 1 == 1 && piece.touches(q)) {
            continue;
        }
        if let Some((a, b)) = piece.tqg_pair() {
            if nm.lambda_leak > 0.0 && rng.gen_range(0.0..1.0) < nm.lambda_leak {
                let victim = if rng.gen_range(0.0..1.0) < 0.5 { a } else { b };
                project_out(&mut psi, victim, rng);
                leaked |= 1 << victim;
                // the gate that triggered the event is itself removed
                continue;
            }
        }
        crate::sim::statevec::apply_piece(&mut psi, piece, circuit);
        if let Some((a, b)) = piece.tqg_pair() {
            if nm.lambda_incoh > 0.0 && rng.gen_range(0.0..1.0) < nm.lambda_incoh {
                apply_single_pauli(&mut psi, a, rng.gen_range(0..4u8));
                apply_single_pauli(&mut psi, b, rng.gen_range(0..4u8));
            }
            if nm.lambda_coh > 0.0 {
                // one depth layer elapsed
                for q in 0..n {
                    if leaked >> q & 1 == 0 && rng.gen_range(0.0..1.0) < nm.lambda_coh {
                        let sign = if rng.gen_range(0.0..1.0) < 0.5 { 1.0 } else { -1.0 };
                        apply_rz_kick(&mut psi, q, sign);
                    }
                }
            }
        }
    }
    // measure: joint (y, bits) Born sampling, then leaked overrides
    let l = circuit.l_physical;
    let hi = 1usize << l;
    let i_unit = Complex64::new(0.0, 1.0);
    let mut u: f64 = rng.gen_range(0.0..1.0);
    let mut outcome = (1i8, 0u64);
    'search: for b in 0..1u64 << l {
        let a0 = psi[b as usize];
        let a1 = psi[b as usize | hi];
        for (y, amp) in [(1i8, a0 - i_unit * a1), (-1i8, a0 + i_unit * a1)] {
            let p = amp.norm_sqr() / 2.0;
            if u < p {
                outcome = (y, b);
                break 'search;
            }
            u -= p;
        }
    }
    let (mut y, mut bits) = outcome;
    bits |= leaked & ((1 << l) - 1);
    if leaked >> ancilla & 1 == 1 {
        y = 1; // leaked qubits read out as |1>, which the Y basis maps to +1
    }
    ShotRecord {
        ancilla_y: y,
        physical_bits: bits,
        l_physical: l,
        circuit_index: circuit.meta.circuit_index,
        trial_branch: circuit.meta.trial_branch,
        direction_sign: circuit.meta.direction_sign,
        leaked_mask: leaked,
    }
}

/// Sample `shots` independent noisy trajectories of one circuit.
pub fn run_leakage<R: Rng>(
    circuit: &Circuit,
    nm: &NoiseModel,
    shots: usize,
    rng: &mut R,
) -> Result<Vec<ShotRecord>, SimError> {
    nm.validate()?;
    assert!(shots >= 1);
    let n = circuit.l_physical + 1;
    if n > crate::sim::statevec::STATE_QUBIT_LIMIT {
        return Err(SimError::DimensionTooLarge(n));
    }
    let pieces = compile(circuit);
    Ok((0..shots).map(|_| trajectory(circuit, &pieces, nm, rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitMeta, Gate, TrialBranch};
    use crate::pauli::PauliString;
    use rand::SeedableRng;

    fn circuit(l: usize, hf_bits: u64, extra: Vec<Gate>) -> Circuit {
        let mut gates = vec![Gate::AncillaPrepare];
        gates.extend(extra);
        gates.push(Gate::AncillaMeasureY);
        gates.push(Gate::PhysicalMeasureZ);
        Circuit {
            l_physical: l,
            z_coefficients: vec![0.4; l],
            gates,
            meta: CircuitMeta {
                circuit_index: 0,
                trial_branch: TrialBranch::Plus,
                direction_sign: 1,
                lambda_a: 1.0,
                lambda_a_prime: 1.0,
                lambda_s: 1.0,
                eta: if hf_bits.count_ones() % 2 == 0 { 1 } else { -1 },
                hf_bits,
                s_central: 0.0,
                trial_energy: 0.0,
            },
        }
    }

    #[test]
    fn noiseless_trajectories_match_exact_distribution() {
        let gates = vec![
            Gate::ControlledPauliRotation {
                string: PauliString::parse("XY").unwrap(),
                angle: 0.7,
            },
            Gate::AncillaPhase { angle: 0.5 },
            Gate::ControlledDiagonalSegment { duration: 1.1, mask: 0b11 },
        ];
        let c = circuit(2, 0b01, gates);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2);
        let n_shots = 20_000;
        let records =
            run_leakage(&c, &NoiseModel::NOISELESS, n_shots, &mut rng).unwrap();
        let exact = crate::sim::statevec::run_exact(&c).unwrap();
        let dist = exact.outcome_distribution();
        // two-sample goodness of fit against the exact distribution
        let mut counts = std::collections::HashMap::new();
        for r in &records {
            *counts.entry((r.ancilla_y, r.physical_bits)).or_insert(0usize) += 1;
        }
        let mut chi2 = 0.0;
        let mut dof = 0;
        for (p, y, b) in dist {
            let expected = p * n_shots as f64;
            if expected < 5.0 {
                continue;
            }
            let got = *counts.get(&(y, b)).unwrap_or(&0) as f64;
            chi2 += (got - expected).powi(2) / expected;
            dof += 1;
        }
        // generous bound: p > 0.001 for dof <= 8 means chi2 below ~26
        assert!(dof >= 2);
        assert!(chi2 < 26.0, "chi2 = {chi2} over {dof} cells");
    }

    #[test]
    fn certain_leakage_forces_ones() {
        // one TQG per qubit pair with λ_leak = 1: some operand leaks at the
        // first TQG; all touched qubits read 1 eventually at high rates
        let gates = vec![Gate::ControlledPauliRotation {
            string: PauliString::parse("XX").unwrap(),
            angle: 0.3,
        }];
        let c = circuit(2, 0b00, gates);
        let nm = NoiseModel { lambda_incoh: 0.0, lambda_coh: 0.0, lambda_leak: 1.0 };
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let records = run_leakage(&c, &nm, 200, &mut rng).unwrap();
        for r in &records {
            assert!(r.leaked_mask != 0);
            for q in 0..3 {
                if r.leaked_mask >> q & 1 == 1 {
                    if q < 2 {
                        assert_eq!(r.physical_bits >> q & 1, 1, "leaked physical reads 1");
                    } else {
                        assert_eq!(r.ancilla_y, 1, "leaked ancilla reads +y");
                    }
                }
            }
        }
    }

    #[test]
    fn stochastic_channels_average_to_density_run() {
        let gates = vec![
            Gate::AncillaPhase { angle: 0.8 },
            Gate::ControlledPauliRotation {
                string: PauliString::parse("ZX").unwrap(),
                angle: 0.6,
            },
        ];
        let c = circuit(2, 0b01, gates);
        let nm = NoiseModel { lambda_incoh: 0.05, lambda_coh: 0.08, lambda_leak: 0.0 };
        let dens = crate::sim::density::run_density(&c, &nm).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let n_shots = 60_000;
        let records = run_leakage(&c, &nm, n_shots, &mut rng).unwrap();
        let mean_y: f64 =
            records.iter().map(|r| r.ancilla_y as f64).sum::<f64>() / n_shots as f64;
        let se = (1.0 / n_shots as f64).sqrt();
        assert!(
            (mean_y - dens.raw_y()).abs() < 5.0 * se + 5e-3,
            "trajectory mean {mean_y} vs density {}",
            dens.raw_y()
        );
    }
}
