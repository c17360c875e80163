//! Gate-level IR for the controlled energy-readout circuit, the reduction
//! passes, and two-qubit-gate cost accounting.
//!
//! A circuit prepares the ancilla, applies every rotation event and every
//! diagonal segment of the three sampled evolutions controlled on the
//! ancilla, folds all scalar phases into a single ancilla Z rotation, and
//! ends with a Y-basis ancilla measurement plus a Z-basis physical
//! measurement. The ancilla expectation then reads off
//! Im<HF|U₁'U₂U₁|HF> up to the calibrated sign.

use serde::{Deserialize, Serialize};

use crate::estimate::TrialEnergies;
use crate::pauli::{pauli_product, PauliString};
use crate::sampler::{Direction, SampledEvolution};
use crate::shift::SplitHamiltonian;

/// Which trial energy the circuit's phase gate encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialBranch {
    Plus,
    Minus,
}

/// One gate of the IR. Angles are radians, durations Ha⁻¹; `mask` selects
/// the physical qubits whose single-Z factors a segment still carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    AncillaPrepare,
    PauliRotation { string: PauliString, angle: f64 },
    ControlledPauliRotation { string: PauliString, angle: f64 },
    DiagonalSegment { duration: f64, mask: u64 },
    ControlledDiagonalSegment { duration: f64, mask: u64 },
    AncillaPhase { angle: f64 },
    AncillaMeasureY,
    PhysicalMeasureZ,
}

impl Gate {
    fn conjugated(&self) -> Gate {
        match self {
            Gate::PauliRotation { string, angle } => {
                Gate::PauliRotation { string: *string, angle: -angle }
            }
            Gate::ControlledPauliRotation { string, angle } => {
                Gate::ControlledPauliRotation { string: *string, angle: -angle }
            }
            Gate::DiagonalSegment { duration, mask } => {
                Gate::DiagonalSegment { duration: -duration, mask: *mask }
            }
            Gate::ControlledDiagonalSegment { duration, mask } => {
                Gate::ControlledDiagonalSegment { duration: -duration, mask: *mask }
            }
            Gate::AncillaPhase { angle } => Gate::AncillaPhase { angle: -angle },
            other => other.clone(),
        }
    }
}

/// Metadata the estimator needs to turn shots into ρ±.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub circuit_index: u32,
    pub trial_branch: TrialBranch,
    /// +1 forward, -1 when the whole circuit runs time-reversed.
    pub direction_sign: i8,
    pub lambda_a: f64,
    pub lambda_a_prime: f64,
    pub lambda_s: f64,
    /// Parity eigenvalue of the initial state.
    pub eta: i8,
    pub hf_bits: u64,
    pub s_central: f64,
    pub trial_energy: f64,
}

/// A controlled energy-readout circuit over `l_physical` + 1 qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub l_physical: usize,
    /// Single-Z coefficient per physical qubit, interpreted by segments.
    pub z_coefficients: Vec<f64>,
    pub gates: Vec<Gate>,
    pub meta: CircuitMeta,
}

impl Circuit {
    pub fn ancilla_index(&self) -> usize {
        self.l_physical
    }

    /// Time-reverse the whole circuit: middle gates reversed and
    /// conjugated, prepare/measure kept in place, direction sign flipped.
    pub fn reversed(&self) -> Circuit {
        let n = self.gates.len();
        assert!(n >= 3);
        let mut gates = Vec::with_capacity(n);
        gates.push(self.gates[0].clone());
        for g in self.gates[1..n - 2].iter().rev() {
            gates.push(g.conjugated());
        }
        gates.push(self.gates[n - 2].clone());
        gates.push(self.gates[n - 1].clone());
        let mut meta = self.meta;
        meta.direction_sign = -meta.direction_sign;
        Circuit { l_physical: self.l_physical, z_coefficients: self.z_coefficients.clone(), gates, meta }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CircuitError {
    #[error("qubit counts differ between evolutions")]
    MismatchedQubitCount,
    #[error("rotation string {0} anticommutes with the parity operator")]
    ParityViolation(String),
    #[error("evolution slot {0} has the wrong time direction")]
    WrongDirection(&'static str),
}

/// Two-qubit-gate prices of the native gate set: an uncontrolled weight-w
/// Pauli rotation costs `2(w-1)`, its ancilla-controlled version one more,
/// and each single-Z factor of a controlled diagonal segment is one
/// ancilla-physical ZZ rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCostModel {
    pub rotation_base: u64,
    pub controlled_extra: u64,
    pub segment_z: u64,
}

impl Default for GateCostModel {
    fn default() -> Self {
        Self { rotation_base: 2, controlled_extra: 1, segment_z: 1 }
    }
}

impl GateCostModel {
    pub fn uncontrolled_rotation(&self, weight: usize) -> u64 {
        if weight <= 1 {
            0
        } else {
            self.rotation_base * (weight as u64 - 1)
        }
    }

    pub fn controlled_rotation(&self, weight: usize) -> u64 {
        if weight == 0 {
            0
        } else {
            self.rotation_base * (weight as u64 - 1) + self.controlled_extra
        }
    }

    /// Cost of exp(i θ h) for a bare Hamiltonian term: mutually commuting
    /// diagonal strings compile to ZZ-rotation chains, everything else to a
    /// Pauli gadget.
    pub fn bare_term_cost(&self, s: &PauliString) -> u64 {
        let w = s.weight();
        if s.is_diagonal() {
            if w <= 1 {
                0
            } else {
                self.segment_z * (w as u64 - 1)
            }
        } else {
            self.uncontrolled_rotation(w)
        }
    }
}

/// Occupation of each physical qubit in the initial basis state, and its
/// parity sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupationProfile {
    pub occupations: u64,
    pub parity: i8,
    pub l: usize,
}

impl OccupationProfile {
    pub fn from_bits(bits: u64, l: usize) -> Self {
        let ones = (bits & mask_of(l)).count_ones();
        Self { occupations: bits, parity: if ones % 2 == 0 { 1 } else { -1 }, l }
    }
}

fn mask_of(l: usize) -> u64 {
    if l >= 64 {
        u64::MAX
    } else {
        (1 << l) - 1
    }
}

fn emit_evolution(evo: &SampledEvolution, split: &SplitHamiltonian, out: &mut Vec<Gate>) {
    let l = split.qubit_count();
    let full = mask_of(l);
    let total = evo.config.total_time;
    let tau = evo.config.gate_angle;
    match evo.config.direction {
        Direction::Forward => {
            let mut t_prev = 0.0;
            for ev in &evo.events {
                out.push(Gate::ControlledDiagonalSegment { duration: ev.time - t_prev, mask: full });
                let string = split.h_i.terms()[ev.term_index].string;
                out.push(Gate::ControlledPauliRotation {
                    string,
                    angle: ev.rotation_sign as f64 * tau,
                });
                t_prev = ev.time;
            }
            out.push(Gate::ControlledDiagonalSegment { duration: total - t_prev, mask: full });
        }
        Direction::Reverse => {
            // reverse event order; segment durations negated. Rotation signs
            // were already flipped by the sampler.
            let mut t_prev = total;
            for ev in evo.events.iter().rev() {
                out.push(Gate::ControlledDiagonalSegment { duration: ev.time - t_prev, mask: full });
                let string = split.h_i.terms()[ev.term_index].string;
                out.push(Gate::ControlledPauliRotation {
                    string,
                    angle: ev.rotation_sign as f64 * tau,
                });
                t_prev = ev.time;
            }
            out.push(Gate::ControlledDiagonalSegment { duration: -t_prev, mask: full });
        }
    }
}

/// Assemble the controlled Hadamard-test circuit for one branch.
///
/// `u1` must be a forward sweep draw, `u2` a reverse constant-schedule draw
/// of duration s, and `u1p` a reverse sweep draw independent of `u1`. All
/// scalar phases (identity offset over the signed segment durations plus
/// s·E_trial) are folded into one ancilla Z rotation placed after the `u2`
/// block, which is the only gate distinguishing the two trial branches.
///
/// Not inlined: one compiled instance keeps emitted angles bit-identical
/// across call sites.
#[allow(clippy::too_many_arguments)]
#[inline(never)]
pub fn build_hadamard_test(
    u1: &SampledEvolution,
    u2: &SampledEvolution,
    u1p: &SampledEvolution,
    split: &SplitHamiltonian,
    identity_offset: f64,
    trial: &TrialEnergies,
    branch: TrialBranch,
    profile: &OccupationProfile,
    circuit_index: u32,
) -> Result<Circuit, CircuitError> {
    if profile.l != split.qubit_count() {
        return Err(CircuitError::MismatchedQubitCount);
    }
    if u1.config.direction != Direction::Forward {
        return Err(CircuitError::WrongDirection("u1"));
    }
    if u2.config.direction != Direction::Reverse || u1p.config.direction != Direction::Reverse {
        return Err(CircuitError::WrongDirection("u2/u1p"));
    }
    let trial_energy = match branch {
        TrialBranch::Plus => trial.e_plus(),
        TrialBranch::Minus => trial.e_minus(),
    };
    let s_central = u2.config.total_time;
    let mut gates = vec![Gate::AncillaPrepare];
    emit_evolution(u1, split, &mut gates);
    emit_evolution(u2, split, &mut gates);
    // net segment durations: +T - s - T, so the offset contributes -offset·s
    gates.push(Gate::AncillaPhase { angle: s_central * (trial_energy - identity_offset) });
    emit_evolution(u1p, split, &mut gates);
    gates.push(Gate::AncillaMeasureY);
    gates.push(Gate::PhysicalMeasureZ);
    Ok(Circuit {
        l_physical: split.qubit_count(),
        z_coefficients: split.z_coefficients(),
        gates,
        meta: CircuitMeta {
            circuit_index,
            trial_branch: branch,
            direction_sign: 1,
            lambda_a: u1.lambda,
            lambda_a_prime: u1p.lambda,
            lambda_s: u2.lambda,
            eta: profile.parity,
            hf_bits: profile.occupations,
            s_central,
            trial_energy,
        },
    })
}

/// Two branch circuits sharing one set of draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StitchedPair {
    pub plus: Circuit,
    pub minus: Circuit,
    pub shared_draws: SharedDraws,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharedDraws {
    pub u1: SampledEvolution,
    pub u2: SampledEvolution,
    pub u1p: SampledEvolution,
}

/// Stream slots within a circuit index.
const SLOT_U1: u64 = 0;
const SLOT_U2: u64 = 1;
const SLOT_U1P: u64 = 2;

/// Generate an ensemble of stitched pairs with alternating time direction.
#[allow(clippy::too_many_arguments)]
pub fn build_ensemble(
    split: &SplitHamiltonian,
    identity_offset: f64,
    t_sweep: f64,
    tau: f64,
    trial: &TrialEnergies,
    profile: &OccupationProfile,
    n_circuits: usize,
    master_seed: u64,
) -> Vec<StitchedPair> {
    use crate::sampler::{sample_evolution, SamplerConfig};
    use crate::schedule::SweepSchedule;
    assert!(n_circuits >= 1);
    (0..n_circuits)
        .map(|i| {
            let cfg = |slot: u64, time: f64, direction: Direction| SamplerConfig {
                total_time: time,
                gate_angle: tau,
                direction,
                rng_seed: master_seed,
                stream_id: (i as u64) * 8 + slot,
            };
            let u1 = sample_evolution(split, SweepSchedule::Linear, &cfg(SLOT_U1, t_sweep, Direction::Forward));
            let u2 = sample_evolution(
                split,
                SweepSchedule::Constant,
                &cfg(SLOT_U2, trial.s_central, Direction::Reverse),
            );
            let u1p = sample_evolution(
                split,
                SweepSchedule::Linear,
                &cfg(SLOT_U1P, t_sweep, Direction::Reverse),
            );
            let build = |branch| {
                build_hadamard_test(
                    &u1,
                    &u2,
                    &u1p,
                    split,
                    identity_offset,
                    trial,
                    branch,
                    profile,
                    i as u32,
                )
                .expect("consistent inputs")
            };
            let mut plus = build(TrialBranch::Plus);
            let mut minus = build(TrialBranch::Minus);
            if i % 2 == 1 {
                plus = plus.reversed();
                minus = minus.reversed();
            }
            StitchedPair { plus, minus, shared_draws: SharedDraws { u1, u2, u1p } }
        })
        .collect()
}

/// Rewrite rotations whose strings carry more Zs than identities by the
/// parity operator, folding the sign and the sector eigenvalue η into the
/// angle. Acts identically on the η sector.
pub fn parity_reduce(c: &Circuit, profile: &OccupationProfile) -> Result<Circuit, CircuitError> {
    let l = c.l_physical;
    let parity_string = PauliString::from_masks(0, mask_of(l), l);
    let eta = profile.parity as f64;
    let mut out = c.clone();
    for g in &mut out.gates {
        let (string, angle, controlled) = match g {
            Gate::PauliRotation { string, angle } => (string, angle, false),
            Gate::ControlledPauliRotation { string, angle } => (string, angle, true),
            _ => continue,
        };
        let _ = controlled;
        if string.xy_weight() % 2 != 0 {
            return Err(CircuitError::ParityViolation(string.label()));
        }
        let n_z = string.z_weight();
        let n_i = l - string.weight();
        if n_z > n_i {
            let (phase, rewritten) = pauli_product(string, &parity_string).expect("equal lengths");
            debug_assert!(phase.0 % 2 == 0, "commuting Hermitian product has a real sign");
            let sign = if phase.0 == 0 { 1.0 } else { -1.0 };
            *string = rewritten;
            *angle *= eta * sign;
        }
    }
    Ok(out)
}

/// Occupation-number reduction: while a qubit's occupation is still fixed,
/// Z factors on it act as (-1)^{n̄}, so they fold into signs and ancilla
/// phases. An X or Y on a qubit releases it. Controlled diagonal segments
/// participate through their single-Z factors.
pub fn occupation_reduce(c: &Circuit, profile: &OccupationProfile) -> Circuit {
    let l = c.l_physical;
    let mut live = mask_of(l);
    let mut extra_phase = 0.0;
    let mut gates = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        if live == 0 {
            gates.push(g.clone());
            continue;
        }
        match g {
            Gate::PauliRotation { string, angle } | Gate::ControlledPauliRotation { string, angle } => {
                let controlled = matches!(g, Gate::ControlledPauliRotation { .. });
                let pure_z = string.z_mask() & !string.x_mask();
                let fold = pure_z & live;
                let mut new_string = *string;
                let mut new_angle = *angle;
                if fold != 0 {
                    let flips = (fold & profile.occupations).count_ones();
                    if flips % 2 == 1 {
                        new_angle = -new_angle;
                    }
                    for q in 0..l {
                        if fold >> q & 1 == 1 {
                            new_string.set_axis(q, crate::pauli::Axis::I);
                        }
                    }
                }
                live &= !string.x_mask();
                if new_string.is_identity() {
                    if controlled {
                        gates.push(Gate::AncillaPhase { angle: new_angle });
                    } else {
                        // a bare global phase; kept so states match exactly
                        gates.push(Gate::PauliRotation { string: new_string, angle: new_angle });
                    }
                } else if controlled {
                    gates.push(Gate::ControlledPauliRotation { string: new_string, angle: new_angle });
                } else {
                    gates.push(Gate::PauliRotation { string: new_string, angle: new_angle });
                }
            }
            Gate::ControlledDiagonalSegment { duration, mask } => {
                let folded = mask & live;
                if folded != 0 {
                    let mut phi = 0.0;
                    for q in 0..l {
                        if folded >> q & 1 == 1 {
                            let sign = if profile.occupations >> q & 1 == 1 { -1.0 } else { 1.0 };
                            phi += c.z_coefficients[q] * sign;
                        }
                    }
                    extra_phase += duration * phi;
                }
                let remaining = mask & !live;
                if remaining != 0 {
                    gates.push(Gate::ControlledDiagonalSegment { duration: *duration, mask: remaining });
                }
            }
            other => gates.push(other.clone()),
        }
    }
    let mut out = Circuit {
        l_physical: l,
        z_coefficients: c.z_coefficients.clone(),
        gates,
        meta: c.meta,
    };
    fold_ancilla_phase(&mut out, extra_phase);
    out
}

/// Convert controlled diagonal segments into plain diagonal segments plus
/// one compensating ancilla phase. The uncontrolled segment multiplies the
/// ancilla-0 branch (which stays on the initial basis state) by a known
/// phase, so the relative phase is restored on the ancilla and the final
/// state is unchanged up to a global phase.
pub fn uncontrol_diagonals(c: &Circuit) -> Circuit {
    let l = c.l_physical;
    let hf = c.meta.hf_bits;
    let mut extra_phase = 0.0;
    let mut gates = Vec::with_capacity(c.gates.len());
    for g in &c.gates {
        match g {
            Gate::ControlledDiagonalSegment { duration, mask } => {
                let mut d_ref = 0.0;
                for q in 0..l {
                    if mask >> q & 1 == 1 {
                        let sign = if hf >> q & 1 == 1 { -1.0 } else { 1.0 };
                        d_ref += c.z_coefficients[q] * sign;
                    }
                }
                extra_phase += duration * d_ref;
                gates.push(Gate::DiagonalSegment { duration: *duration, mask: *mask });
            }
            other => gates.push(other.clone()),
        }
    }
    let mut out = Circuit {
        l_physical: l,
        z_coefficients: c.z_coefficients.clone(),
        gates,
        meta: c.meta,
    };
    fold_ancilla_phase(&mut out, extra_phase);
    out
}

fn fold_ancilla_phase(c: &mut Circuit, extra: f64) {
    if extra == 0.0 {
        return;
    }
    if let Some(Gate::AncillaPhase { angle }) =
        c.gates.iter_mut().find(|g| matches!(g, Gate::AncillaPhase { .. }))
    {
        *angle += extra;
        return;
    }
    let at = c
        .gates
        .iter()
        .position(|g| matches!(g, Gate::AncillaMeasureY))
        .unwrap_or(c.gates.len());
    c.gates.insert(at, Gate::AncillaPhase { angle: extra });
}

/// The default reduction pipeline.
pub fn standard_passes(c: &Circuit, profile: &OccupationProfile) -> Result<Circuit, CircuitError> {
    let c = parity_reduce(c, profile)?;
    let c = occupation_reduce(&c, profile);
    Ok(uncontrol_diagonals(&c))
}

/// Total two-qubit-gate count. Controlled-segment Z factors merge along
/// each qubit until an X or Y rotation interrupts the line.
pub fn count_tqg(c: &Circuit, costs: &GateCostModel) -> u64 {
    let mut total = 0u64;
    let mut open: u64 = 0;
    for g in &c.gates {
        match g {
            Gate::PauliRotation { string, .. } => {
                total += costs.uncontrolled_rotation(string.weight());
                open &= !string.x_mask();
            }
            Gate::ControlledPauliRotation { string, .. } => {
                total += costs.controlled_rotation(string.weight());
                open &= !string.x_mask();
            }
            Gate::ControlledDiagonalSegment { mask, .. } => {
                let new_lines = mask & !open;
                total += new_lines.count_ones() as u64 * costs.segment_z;
                open |= mask;
            }
            _ => {}
        }
    }
    total
}

/// Circuit depth in two-qubit-gate units: earliest-start scheduling where
/// gates occupy their full qubit support (ancilla included) for their cost.
pub fn depth_tqg(c: &Circuit, costs: &GateCostModel) -> u64 {
    let n = c.l_physical + 1;
    let ancilla = c.l_physical;
    let mut finish = vec![0u64; n];
    let mut open: u64 = 0;
    let schedule = |support: &[usize], cost: u64, finish: &mut Vec<u64>| {
        if cost == 0 {
            return;
        }
        let start = support.iter().map(|&q| finish[q]).max().unwrap_or(0);
        for &q in support {
            finish[q] = start + cost;
        }
    };
    for g in &c.gates {
        match g {
            Gate::PauliRotation { string, .. } => {
                let support: Vec<usize> =
                    (0..c.l_physical).filter(|&q| string.axis(q) != crate::pauli::Axis::I).collect();
                schedule(&support, costs.uncontrolled_rotation(string.weight()), &mut finish);
                open &= !string.x_mask();
            }
            Gate::ControlledPauliRotation { string, .. } => {
                let mut support: Vec<usize> =
                    (0..c.l_physical).filter(|&q| string.axis(q) != crate::pauli::Axis::I).collect();
                support.push(ancilla);
                schedule(&support, costs.controlled_rotation(string.weight()), &mut finish);
                open &= !string.x_mask();
            }
            Gate::ControlledDiagonalSegment { mask, .. } => {
                let new_lines = mask & !open;
                let cost = new_lines.count_ones() as u64 * costs.segment_z;
                let mut support: Vec<usize> =
                    (0..c.l_physical).filter(|&q| new_lines >> q & 1 == 1).collect();
                support.push(ancilla);
                schedule(&support, cost, &mut finish);
                open |= mask;
            }
            _ => {}
        }
    }
    finish.into_iter().max().unwrap_or(0)
}
