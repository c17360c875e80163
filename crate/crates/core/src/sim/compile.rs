//! Lowering of IR gates to the native piece stream: single-qubit basis
//! changes, CX ladders, and (controlled) Z rotations. Noise backends hang
//! error channels off the two-qubit pieces, so this stream defines exactly
//! where errors strike.

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::pauli::Axis;

/// One native operation.
#[derive(Debug, Clone)]
pub enum Piece {
    /// Arbitrary single-qubit unitary (basis changes, Hadamard).
    OneQubit { q: usize, m: [[Complex64; 2]; 2] },
    /// exp(iθ Z_q).
    Rz { q: usize, theta: f64 },
    /// Phase e^{iθ} on the |1> level of q.
    Phase1 { q: usize, theta: f64 },
    /// Global phase e^{iθ}.
    GlobalPhase { theta: f64 },
    /// CNOT; a two-qubit gate.
    Cx { control: usize, target: usize },
    /// Controlled exp(iθ Z_target); a two-qubit gate.
    CRz { control: usize, target: usize, theta: f64 },
    /// Uncontrolled diagonal segment over `mask`; zero two-qubit gates.
    DiagSeg { duration: f64, mask: u64 },
}

impl Piece {
    /// The operand pair when this piece is a two-qubit gate.
    pub fn tqg_pair(&self) -> Option<(usize, usize)> {
        match self {
            Piece::Cx { control, target } | Piece::CRz { control, target, .. } => {
                Some((*control, *target))
            }
            _ => None,
        }
    }

    pub fn touches(&self, qubit: usize) -> bool {
        match self {
            Piece::OneQubit { q, .. } | Piece::Rz { q, .. } | Piece::Phase1 { q, .. } => {
                *q == qubit
            }
            Piece::Cx { control, target } | Piece::CRz { control, target, .. } => {
                *control == qubit || *target == qubit
            }
            Piece::DiagSeg { mask, .. } => mask >> qubit & 1 == 1,
            Piece::GlobalPhase { .. } => false,
        }
    }
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hadamard() -> [[Complex64; 2]; 2] {
    [[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
     [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]]
}

/// B with B P B† = Z for the given axis; applied before the CX ladder.
fn basis_in(axis: Axis) -> [[Complex64; 2]; 2] {
    match axis {
        Axis::X => hadamard(),
        // H·S†
        Axis::Y => [[c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)],
                    [c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]],
        _ => unreachable!("only X/Y need a basis change"),
    }
}

/// B† for the same axis; applied after the reverse ladder.
fn basis_out(axis: Axis) -> [[Complex64; 2]; 2] {
    match axis {
        Axis::X => hadamard(),
        // S·H
        Axis::Y => [[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
                    [c(0.0, FRAC_1_SQRT_2), c(0.0, -FRAC_1_SQRT_2)]],
        _ => unreachable!(),
    }
}

fn rotation_pieces(
    string: &crate::pauli::PauliString,
    angle: f64,
    control: Option<usize>,
    out: &mut Vec<Piece>,
) {
    let support: Vec<usize> =
        (0..string.len()).filter(|&q| string.axis(q) != Axis::I).collect();
    if support.is_empty() {
        match control {
            Some(a) => out.push(Piece::Phase1 { q: a, theta: angle }),
            None => out.push(Piece::GlobalPhase { theta: angle }),
        }
        return;
    }
    for &q in &support {
        match string.axis(q) {
            Axis::X | Axis::Y => out.push(Piece::OneQubit { q, m: basis_in(string.axis(q)) }),
            _ => {}
        }
    }
    for w in support.windows(2) {
        out.push(Piece::Cx { control: w[0], target: w[1] });
    }
    let target = *support.last().expect("nonempty");
    match control {
        Some(a) => out.push(Piece::CRz { control: a, target, theta: angle }),
        None => out.push(Piece::Rz { q: target, theta: angle }),
    }
    for w in support.windows(2).rev() {
        out.push(Piece::Cx { control: w[0], target: w[1] });
    }
    for &q in &support {
        match string.axis(q) {
            Axis::X | Axis::Y => out.push(Piece::OneQubit { q, m: basis_out(string.axis(q)) }),
            _ => {}
        }
    }
}

/// Compile a circuit into the native piece stream. Measure markers are
/// dropped; the backends read out the final state themselves.
pub fn compile(circuit: &Circuit) -> Vec<Piece> {
    let ancilla = circuit.ancilla_index();
    let mut out = Vec::new();
    for g in &circuit.gates {
        match g {
            Gate::AncillaPrepare => out.push(Piece::OneQubit { q: ancilla, m: hadamard() }),
            Gate::PauliRotation { string, angle } => {
                rotation_pieces(string, *angle, None, &mut out)
            }
            Gate::ControlledPauliRotation { string, angle } => {
                rotation_pieces(string, *angle, Some(ancilla), &mut out)
            }
            Gate::DiagonalSegment { duration, mask } => {
                out.push(Piece::DiagSeg { duration: *duration, mask: *mask })
            }
            Gate::ControlledDiagonalSegment { duration, mask } => {
                for q in 0..circuit.l_physical {
                    if mask >> q & 1 == 1 {
                        out.push(Piece::CRz {
                            control: ancilla,
                            target: q,
                            theta: duration * circuit.z_coefficients[q],
                        });
                    }
                }
            }
            Gate::AncillaPhase { angle } => out.push(Piece::Phase1 { q: ancilla, theta: *angle }),
            Gate::AncillaMeasureY | Gate::PhysicalMeasureZ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitMeta, TrialBranch};
    use crate::pauli::PauliString;
    use crate::sim::statevec::{apply_gate, apply_piece, basis_state};

    fn circuit_of(l: usize, gates: Vec<Gate>) -> Circuit {
        Circuit {
            l_physical: l,
            z_coefficients: vec![0.3, -0.7, 0.1, 0.5][..l].to_vec(),
            gates,
            meta: CircuitMeta {
                circuit_index: 0,
                trial_branch: TrialBranch::Plus,
                direction_sign: 1,
                lambda_a: 1.0,
                lambda_a_prime: 1.0,
                lambda_s: 1.0,
                eta: 1,
                hf_bits: 0,
                s_central: 0.0,
                trial_energy: 0.0,
            },
        }
    }

    #[test]
    fn compiled_pieces_reproduce_abstract_gates() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(31);
        let l = 4;
        let cases = [
            Gate::PauliRotation { string: PauliString::parse("XZYI").unwrap(), angle: 0.37 },
            Gate::PauliRotation { string: PauliString::parse("IYII").unwrap(), angle: -0.9 },
            Gate::PauliRotation { string: PauliString::parse("IIII").unwrap(), angle: 0.21 },
            Gate::ControlledPauliRotation {
                string: PauliString::parse("YXZY").unwrap(),
                angle: -0.53,
            },
            Gate::ControlledPauliRotation {
                string: PauliString::parse("IIZI").unwrap(),
                angle: 0.8,
            },
            Gate::ControlledDiagonalSegment { duration: 0.9, mask: 0b1011 },
            Gate::DiagonalSegment { duration: -1.3, mask: 0b0111 },
            Gate::AncillaPhase { angle: 1.1 },
        ];
        for case in cases {
            let c = circuit_of(l, vec![case.clone()]);
            // random dense state over l+1 qubits
            let dim = 1usize << (l + 1);
            let mut psi: Vec<num_complex::Complex64> = (0..dim)
                .map(|_| num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|a| *a /= norm);

            let mut direct = psi.clone();
            apply_gate(&mut direct, &case, &c);
            let mut composed = psi.clone();
            for p in compile(&circuit_of(l, vec![case.clone()])) {
                apply_piece(&mut composed, &p, &c);
            }
            let err = direct
                .iter()
                .zip(&composed)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "gate {case:?}: max deviation {err}");
        }
        let _ = basis_state(l + 1, 0);
    }

    #[test]
    fn tqg_counts_match_cost_model() {
        use crate::circuit::{count_tqg, GateCostModel};
        let l = 4;
        let gates = vec![
            Gate::AncillaPrepare,
            Gate::ControlledPauliRotation {
                string: PauliString::parse("XXYY").unwrap(),
                angle: 0.1,
            },
            Gate::PauliRotation { string: PauliString::parse("ZZXI").unwrap(), angle: 0.2 },
            Gate::ControlledDiagonalSegment { duration: 0.4, mask: 0b0011 },
            Gate::AncillaMeasureY,
            Gate::PhysicalMeasureZ,
        ];
        let c = circuit_of(l, gates);
        let pieces = compile(&c);
        let tqg = pieces.iter().filter(|p| p.tqg_pair().is_some()).count() as u64;
        assert_eq!(tqg, count_tqg(&c, &GateCostModel::default()));
    }
}
