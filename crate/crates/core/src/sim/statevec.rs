//! Dense statevector execution of circuits and of raw sampled evolutions.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{Circuit, Gate};
use crate::pauli::PauliString;
use crate::sampler::{Direction, SampledEvolution};
use crate::shift::SplitHamiltonian;
use crate::sim::compile::Piece;
use crate::sim::{ShotRecord, SimError};

pub const STATE_QUBIT_LIMIT: usize = 14;

pub fn basis_state(n_qubits: usize, index: u64) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
    psi[index as usize] = Complex64::new(1.0, 0.0);
    psi
}

/// exp(i·angle·P) applied in place, optionally controlled.
pub fn rotate_state(psi: &mut [Complex64], string: &PauliString, angle: f64) {
    rotation_kernel(psi, string, angle, None);
}

fn rotation_kernel(
    psi: &mut [Complex64],
    string: &PauliString,
    angle: f64,
    control: Option<usize>,
) {
    let x = string.x_mask();
    let cos = Complex64::new(angle.cos(), 0.0);
    let isin = Complex64::new(0.0, angle.sin());
    let gated = |i: usize| control.map_or(true, |a| i >> a & 1 == 1);
    if x == 0 {
        // diagonal: e^{iθ·(±1)} per basis state
        let zy = string.z_mask();
        for (i, amp) in psi.iter_mut().enumerate() {
            if !gated(i) {
                continue;
            }
            let sign = if (i as u64 & zy).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            *amp *= cos + isin * sign;
        }
        return;
    }
    for i in 0..psi.len() {
        let j = i ^ x as usize;
        if j < i || !gated(i) {
            continue;
        }
        // P|j> = phase(j) |i>, P|i> = phase(i) |j>
        let pi = crate::dense::string_action(string, i as u64);
        let pj = crate::dense::string_action(string, j as u64);
        let (a, b) = (psi[i], psi[j]);
        psi[i] = cos * a + isin * pj * b;
        psi[j] = cos * b + isin * pi * a;
    }
}

fn diagonal_kernel(
    psi: &mut [Complex64],
    duration: f64,
    mask: u64,
    z_coeffs: &[f64],
    control: Option<usize>,
) {
    let gated = |i: usize| control.map_or(true, |a| i >> a & 1 == 1);
    for (i, amp) in psi.iter_mut().enumerate() {
        if !gated(i) {
            continue;
        }
        let mut d = 0.0;
        for (q, c) in z_coeffs.iter().enumerate() {
            if mask >> q & 1 == 1 {
                d += c * if i >> q & 1 == 1 { -1.0 } else { 1.0 };
            }
        }
        *amp *= Complex64::from_polar(1.0, duration * d);
    }
}

fn hadamard_kernel(psi: &mut [Complex64], q: usize) {
    let bit = 1usize << q;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..psi.len() {
        if i & bit != 0 {
            continue;
        }
        let (a, b) = (psi[i], psi[i | bit]);
        psi[i] = (a + b) * s;
        psi[i | bit] = (a - b) * s;
    }
}

/// Apply one IR gate to a statevector over `l_physical + 1` qubits.
pub fn apply_gate(psi: &mut [Complex64], gate: &Gate, circuit: &Circuit) {
    let ancilla = circuit.ancilla_index();
    match gate {
        Gate::AncillaPrepare => hadamard_kernel(psi, ancilla),
        Gate::PauliRotation { string, angle } => rotation_kernel(psi, string, *angle, None),
        Gate::ControlledPauliRotation { string, angle } => {
            rotation_kernel(psi, string, *angle, Some(ancilla))
        }
        Gate::DiagonalSegment { duration, mask } => {
            diagonal_kernel(psi, *duration, *mask, &circuit.z_coefficients, None)
        }
        Gate::ControlledDiagonalSegment { duration, mask } => {
            diagonal_kernel(psi, *duration, *mask, &circuit.z_coefficients, Some(ancilla))
        }
        Gate::AncillaPhase { angle } => {
            let bit = 1usize << ancilla;
            let ph = Complex64::from_polar(1.0, *angle);
            for (i, amp) in psi.iter_mut().enumerate() {
                if i & bit != 0 {
                    *amp *= ph;
                }
            }
        }
        Gate::AncillaMeasureY | Gate::PhysicalMeasureZ => {}
    }
}

/// Apply one compiled piece.
pub fn apply_piece(psi: &mut [Complex64], piece: &Piece, circuit: &Circuit) {
    match piece {
        Piece::OneQubit { q, m } => {
            let bit = 1usize << q;
            for i in 0..psi.len() {
                if i & bit != 0 {
                    continue;
                }
                let (a, b) = (psi[i], psi[i | bit]);
                psi[i] = m[0][0] * a + m[0][1] * b;
                psi[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
        Piece::Rz { q, theta } => {
            for (i, amp) in psi.iter_mut().enumerate() {
                let sign = if i >> q & 1 == 1 { -1.0 } else { 1.0 };
                *amp *= Complex64::from_polar(1.0, theta * sign);
            }
        }
        Piece::Phase1 { q, theta } => {
            for (i, amp) in psi.iter_mut().enumerate() {
                if i >> q & 1 == 1 {
                    *amp *= Complex64::from_polar(1.0, *theta);
                }
            }
        }
        Piece::GlobalPhase { theta } => {
            let ph = Complex64::from_polar(1.0, *theta);
            psi.iter_mut().for_each(|a| *a *= ph);
        }
        Piece::Cx { control, target } => {
            let cb = 1usize << control;
            let tb = 1usize << target;
            for i in 0..psi.len() {
                if i & cb != 0 && i & tb == 0 {
                    psi.swap(i, i | tb);
                }
            }
        }
        Piece::CRz { control, target, theta } => {
            let cb = 1usize << control;
            let tb = 1usize << target;
            for (i, amp) in psi.iter_mut().enumerate() {
                if i & cb != 0 {
                    let sign = if i & tb != 0 { -1.0 } else { 1.0 };
                    *amp *= Complex64::from_polar(1.0, theta * sign);
                }
            }
        }
        Piece::DiagSeg { duration, mask } => {
            diagonal_kernel(psi, *duration, *mask, &circuit.z_coefficients, None)
        }
    }
}

/// Exact final state of a circuit with its derived expectations.
#[derive(Debug, Clone)]
pub struct ExactRun {
    pub state: Vec<Complex64>,
    pub l_physical: usize,
    pub hf_bits: u64,
    pub eta: i8,
}

impl ExactRun {
    fn branches(&self, b: u64) -> (Complex64, Complex64) {
        let hi = 1usize << self.l_physical;
        (self.state[b as usize], self.state[b as usize | hi])
    }

    /// <Y> over all outcomes; the infinite-shot raw value.
    pub fn raw_y(&self) -> f64 {
        (0..1u64 << self.l_physical)
            .map(|b| {
                let (a0, a1) = self.branches(b);
                2.0 * (a1 * a0.conj()).im
            })
            .sum()
    }

    /// <Y · 1[register = HF]>; the infinite-shot HF-projected value.
    pub fn hf_y(&self) -> f64 {
        let (a0, a1) = self.branches(self.hf_bits);
        2.0 * (a1 * a0.conj()).im
    }

    /// (<Y · 1[parity = η]>, P[parity = η]).
    pub fn parity_y(&self) -> (f64, f64) {
        let mut num = 0.0;
        let mut prob = 0.0;
        for b in 0..1u64 << self.l_physical {
            let parity = if b.count_ones() % 2 == 0 { 1 } else { -1 };
            if parity != self.eta as i32 {
                continue;
            }
            let (a0, a1) = self.branches(b);
            num += 2.0 * (a1 * a0.conj()).im;
            prob += a0.norm_sqr() + a1.norm_sqr();
        }
        (num, prob)
    }

    /// Born probabilities over joint (y, bits) outcomes:
    /// P(y = ±1, b) = |Φ₀(b) ∓ iΦ₁(b)|²/2.
    pub fn outcome_distribution(&self) -> Vec<(f64, i8, u64)> {
        let mut out = Vec::with_capacity(2 << self.l_physical);
        for b in 0..1u64 << self.l_physical {
            let (a0, a1) = self.branches(b);
            let i = Complex64::new(0.0, 1.0);
            out.push(((a0 - i * a1).norm_sqr() / 2.0, 1i8, b));
            out.push(((a0 + i * a1).norm_sqr() / 2.0, -1i8, b));
        }
        out
    }

    /// Draw shot records from the exact Born distribution.
    pub fn sample_shots<R: Rng>(
        &self,
        circuit: &Circuit,
        shots: usize,
        rng: &mut R,
    ) -> Vec<ShotRecord> {
        let dist = self.outcome_distribution();
        let mut cdf = Vec::with_capacity(dist.len());
        let mut acc = 0.0;
        for (p, _, _) in &dist {
            acc += p;
            cdf.push(acc);
        }
        let total = acc;
        (0..shots)
            .map(|_| {
                let u: f64 = rng.gen_range(0.0..total);
                let k = cdf.partition_point(|&c| c < u).min(dist.len() - 1);
                let (_, y, b) = dist[k];
                ShotRecord {
                    ancilla_y: y,
                    physical_bits: b,
                    l_physical: self.l_physical,
                    circuit_index: circuit.meta.circuit_index,
                    trial_branch: circuit.meta.trial_branch,
                    direction_sign: circuit.meta.direction_sign,
                    leaked_mask: 0,
                }
            })
            .collect()
    }

    pub fn expectations(&self, circuit: &Circuit) -> crate::estimate::ExactExpectation {
        let (py, pp) = self.parity_y();
        crate::estimate::ExactExpectation {
            circuit_index: circuit.meta.circuit_index,
            trial_branch: circuit.meta.trial_branch,
            raw_y: self.raw_y(),
            parity_y: py,
            parity_prob: pp,
            hf_y: self.hf_y(),
        }
    }
}

/// Run a circuit exactly: the physical register starts in the reference
/// basis state, the ancilla in |0>.
pub fn run_exact(circuit: &Circuit) -> Result<ExactRun, SimError> {
    let n = circuit.l_physical + 1;
    if n > STATE_QUBIT_LIMIT {
        return Err(SimError::DimensionTooLarge(n));
    }
    let mut psi = basis_state(n, circuit.meta.hf_bits);
    for g in &circuit.gates {
        apply_gate(&mut psi, g, circuit);
    }
    Ok(ExactRun {
        state: psi,
        l_physical: circuit.l_physical,
        hf_bits: circuit.meta.hf_bits,
        eta: circuit.meta.eta,
    })
}

/// Apply a raw sampled evolution (no ancilla, no control) to a physical
/// state. Diagonal segments apply the full H_Z including the identity
/// offset, matching the exact evolution operator.
pub fn evolve_sampled(
    evo: &SampledEvolution,
    split: &SplitHamiltonian,
    psi: &mut [Complex64],
) {
    let z = split.z_coefficients();
    let offset = split.h_z.identity_offset();
    let full = (1u64 << split.qubit_count()) - 1;
    let tau = evo.config.gate_angle;
    let total = evo.config.total_time;
    let seg = |psi: &mut [Complex64], dt: f64| {
        diagonal_kernel(psi, dt, full, &z, None);
        let ph = Complex64::from_polar(1.0, dt * offset);
        psi.iter_mut().for_each(|a| *a *= ph);
    };
    match evo.config.direction {
        Direction::Forward => {
            let mut t_prev = 0.0;
            for ev in &evo.events {
                seg(psi, ev.time - t_prev);
                let s = split.h_i.terms()[ev.term_index].string;
                rotation_kernel(psi, &s, ev.rotation_sign as f64 * tau, None);
                t_prev = ev.time;
            }
            seg(psi, total - t_prev);
        }
        Direction::Reverse => {
            let mut t_prev = total;
            for ev in evo.events.iter().rev() {
                seg(psi, ev.time - t_prev);
                let s = split.h_i.terms()[ev.term_index].string;
                rotation_kernel(psi, &s, ev.rotation_sign as f64 * tau, None);
                t_prev = ev.time;
            }
            seg(psi, -t_prev);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitMeta, TrialBranch};

    fn empty_circuit(l: usize, hf_bits: u64, extra: Vec<Gate>) -> Circuit {
        let mut gates = vec![Gate::AncillaPrepare];
        gates.extend(extra);
        gates.push(Gate::AncillaMeasureY);
        gates.push(Gate::PhysicalMeasureZ);
        Circuit {
            l_physical: l,
            z_coefficients: vec![0.0; l],
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
    fn identity_circuit_reads_zero_y_and_reference_bits() {
        let c = empty_circuit(3, 0b101, vec![]);
        let run = run_exact(&c).unwrap();
        assert!(run.raw_y().abs() < 1e-14);
        let dist = run.outcome_distribution();
        let mass_on_hf: f64 =
            dist.iter().filter(|(_, _, b)| *b == 0b101).map(|(p, _, _)| p).sum();
        assert!((mass_on_hf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_gate_calibrates_y_sign() {
        // V = e^{iπ/2}: <Y> = Im e^{iπ/2} = +1
        let c = empty_circuit(2, 0b00, vec![Gate::AncillaPhase {
            angle: std::f64::consts::FRAC_PI_2,
        }]);
        let run = run_exact(&c).unwrap();
        assert!((run.raw_y() - 1.0).abs() < 1e-12);
        assert!((run.hf_y() - 1.0).abs() < 1e-12);
        // and sin(φ) in general
        for phi in [0.3, -0.8, 2.0] {
            let c = empty_circuit(2, 0b00, vec![Gate::AncillaPhase { angle: phi }]);
            assert!((run_exact(&c).unwrap().raw_y() - phi.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn shot_sampler_matches_expectation() {
        use rand::SeedableRng;
        let c = empty_circuit(1, 0b0, vec![Gate::AncillaPhase { angle: 0.6 }]);
        let run = run_exact(&c).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let shots = run.sample_shots(&c, 40_000, &mut rng);
        let mean: f64 =
            shots.iter().map(|s| s.ancilla_y as f64).sum::<f64>() / shots.len() as f64;
        let want = 0.6f64.sin();
        assert!((mean - want).abs() < 0.02, "mean {mean} vs {want}");
    }

    #[test]
    fn controlled_rotation_affects_only_marked_branch() {
        // a controlled X flips the physical bit only in the ancilla-1 branch;
        // <Y> vanishes and half the probability mass moves.
        let s = PauliString::parse("X").unwrap();
        let c = empty_circuit(
            1,
            0b0,
            vec![Gate::ControlledPauliRotation { string: s, angle: std::f64::consts::FRAC_PI_2 }],
        );
        let run = run_exact(&c).unwrap();
        let dist = run.outcome_distribution();
        let p1: f64 = dist.iter().filter(|(_, _, b)| *b == 1).map(|(p, _, _)| p).sum();
        assert!((p1 - 0.5).abs() < 1e-12);
    }
}
