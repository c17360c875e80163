//! Hamiltonian splitting and particle-number shifts that minimize the
//! interaction norm.
//!
//! H splits into H_Z (identity plus single-Z terms) and H_I (everything
//! else); μ_I = Σ|aₙ| over H_I controls both the attenuation factor and the
//! gate count. Adding α_i (ξ_i² - ξ̄_i²) for conserved ξ_i leaves the
//! spectrum on the reference sector untouched while reshuffling double-Z
//! weight, so μ_I(α) can be minimized.

use serde::{Deserialize, Serialize};

use crate::pauli::{
    commutes_with, PauliHamiltonian, PauliString, PauliTerm, SpinOrdering, SymmetryKind,
    SymmetryOperator,
};

/// Coefficients below this are dropped after term merging.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ShiftError {
    #[error("Hamiltonian does not commute with {0:?}")]
    SymmetryViolation(SymmetryKind),
    #[error(transparent)]
    Algebra(#[from] crate::pauli::AlgebraError),
}

/// H = H_Z + H_I with the interaction norm of H_I.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitHamiltonian {
    pub h_z: PauliHamiltonian,
    pub h_i: PauliHamiltonian,
    pub mu_i: f64,
}

impl SplitHamiltonian {
    pub fn qubit_count(&self) -> usize {
        self.h_z.qubit_count()
    }

    /// Single-Z coefficient per qubit (zero where absent).
    pub fn z_coefficients(&self) -> Vec<f64> {
        let l = self.qubit_count();
        let mut out = vec![0.0; l];
        for t in self.h_z.terms() {
            let q = t.string.z_mask().trailing_zeros() as usize;
            out[q] = t.coefficient;
        }
        out
    }
}

/// Partition a Hamiltonian into its diagonal single-Z part and the rest.
pub fn split(h: &PauliHamiltonian) -> SplitHamiltonian {
    let l = h.qubit_count();
    let mut z_terms = Vec::new();
    let mut i_terms = Vec::new();
    for t in h.terms() {
        if t.string.is_diagonal() && t.string.weight() == 1 {
            z_terms.push(*t);
        } else {
            i_terms.push(*t);
        }
    }
    let h_z = PauliHamiltonian::new(l, h.identity_offset(), z_terms).expect("valid by construction");
    let h_i = PauliHamiltonian::new(l, 0.0, i_terms).expect("valid by construction");
    let mu_i = h_i.one_norm();
    SplitHamiltonian { h_z, h_i, mu_i }
}

/// Shift parameters: one α per conserved quantity (n_up, n_down, n_tot),
/// with the exponent fixed to 2, and the reference sector occupations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShiftParams {
    pub alpha: [f64; 3],
    pub sector: SectorOccupation,
}

/// Reference occupation numbers (n̄_up, n̄_down); n̄_tot is their sum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SectorOccupation {
    pub n_up: u32,
    pub n_down: u32,
}

impl SectorOccupation {
    pub fn n_total(&self) -> u32 {
        self.n_up + self.n_down
    }

    /// Infer occupations from a reference basis state.
    pub fn from_bits(bits: u64, l: usize, ordering: SpinOrdering) -> Self {
        let count = |spin: usize| {
            ordering
                .sector_qubits(spin, l)
                .iter()
                .filter(|&&q| bits >> q & 1 == 1)
                .count() as u32
        };
        Self { n_up: count(0), n_down: count(1) }
    }
}

/// Pauli expansion of (Σ_{q in qubits} (I - Z_q)/2)².
pub fn number_op_squared(qubits: &[usize], l: usize) -> PauliHamiltonian {
    let k = qubits.len() as f64;
    // (Σ n_q)² = Σ n_q + 2 Σ_{p<q} n_p n_q with n_q = (I - Z_q)/2 and
    // n_p n_q = (I - Z_p - Z_q + Z_p Z_q)/4.
    let mut terms = Vec::new();
    let mut offset = 0.0;
    offset += k / 2.0; // Σ n_q identity part
    for &q in qubits {
        let mut s = PauliString::identity(l);
        s.set_axis(q, crate::pauli::Axis::Z);
        terms.push(PauliTerm::new(-0.5, s));
    }
    for (a, &p) in qubits.iter().enumerate() {
        for &q in qubits.iter().skip(a + 1) {
            offset += 0.5;
            let mut sp = PauliString::identity(l);
            sp.set_axis(p, crate::pauli::Axis::Z);
            terms.push(PauliTerm::new(-0.5, sp));
            let mut sq = PauliString::identity(l);
            sq.set_axis(q, crate::pauli::Axis::Z);
            terms.push(PauliTerm::new(-0.5, sq));
            let mut spq = PauliString::identity(l);
            spq.set_axis(p, crate::pauli::Axis::Z);
            spq.set_axis(q, crate::pauli::Axis::Z);
            terms.push(PauliTerm::new(0.5, spq));
        }
    }
    PauliHamiltonian::merged(l, offset, terms, 0.0)
}

fn shift_generators(l: usize, ordering: SpinOrdering) -> [PauliHamiltonian; 3] {
    let up = ordering.sector_qubits(0, l);
    let down = ordering.sector_qubits(1, l);
    let all: Vec<usize> = (0..l).collect();
    [
        number_op_squared(&up, l),
        number_op_squared(&down, l),
        number_op_squared(&all, l),
    ]
}

/// H + α₀(n_up² - n̄_up²) + α₁(n_down² - n̄_down²) + α₂(n_tot² - n̄_tot²),
/// expanded to Pauli terms with like terms merged.
pub fn apply_shift(
    h: &PauliHamiltonian,
    params: &ShiftParams,
    ordering: SpinOrdering,
) -> PauliHamiltonian {
    let l = h.qubit_count();
    let gens = shift_generators(l, ordering);
    let sector_sq = [
        (params.sector.n_up as f64).powi(2),
        (params.sector.n_down as f64).powi(2),
        (params.sector.n_total() as f64).powi(2),
    ];
    let mut out = h.clone();
    for (i, gen) in gens.iter().enumerate() {
        let a = params.alpha[i];
        if a == 0.0 {
            continue;
        }
        let mut shifted = gen.scaled(a);
        shifted = shifted.add(
            &PauliHamiltonian::new(l, -a * sector_sq[i], vec![]).expect("scalar"),
            MERGE_TOL,
        );
        out = out.add(&shifted, MERGE_TOL);
    }
    out
}

/// μ_I as a function of α, evaluated through the precomputed affine
/// dependence of every interaction coefficient on α. The single-Z and
/// identity parts never enter.
struct MuModel {
    /// (base coefficient, [dc/dα₀, dc/dα₁, dc/dα₂]) per interaction string
    rows: Vec<(f64, [f64; 3])>,
}

impl MuModel {
    fn build(h: &PauliHamiltonian, ordering: SpinOrdering) -> Self {
        let l = h.qubit_count();
        let gens = shift_generators(l, ordering);
        use std::collections::BTreeMap;
        let mut rows: BTreeMap<(u64, u64), (f64, [f64; 3])> = BTreeMap::new();
        let interacting = |s: &PauliString| !(s.is_diagonal() && s.weight() <= 1);
        for t in h.terms() {
            if interacting(&t.string) {
                rows.entry((t.string.x_mask(), t.string.z_mask()))
                    .or_insert((0.0, [0.0; 3]))
                    .0 += t.coefficient;
            }
        }
        for (i, gen) in gens.iter().enumerate() {
            for t in gen.terms() {
                if interacting(&t.string) {
                    rows.entry((t.string.x_mask(), t.string.z_mask()))
                        .or_insert((0.0, [0.0; 3]))
                        .1[i] += t.coefficient;
                }
            }
        }
        Self { rows: rows.into_values().collect() }
    }

    fn mu(&self, alpha: &[f64; 3]) -> f64 {
        self.rows
            .iter()
            .map(|(c, g)| (c + g[0] * alpha[0] + g[1] * alpha[1] + g[2] * alpha[2]).abs())
            .sum()
    }

    /// Breakpoints of the 1-D section along coordinate `coord` through
    /// `alpha`: the α values where some coefficient crosses zero.
    fn breakpoints(&self, alpha: &[f64; 3], coord: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for (c, g) in &self.rows {
            let slope = g[coord];
            if slope.abs() < 1e-15 {
                continue;
            }
            let rest = c
                + g[0] * alpha[0]
                + g[1] * alpha[1]
                + g[2] * alpha[2]
                - slope * alpha[coord];
            out.push(-rest / slope);
        }
        out
    }
}

/// Minimize μ_I(α) over the three shift parameters.
///
/// The objective is convex piecewise-linear, so each coordinate section is
/// minimized exactly over its breakpoints; multi-start coordinate descent
/// then converges to the global minimum within tolerance.
pub fn optimize_shift(
    h: &PauliHamiltonian,
    sector: SectorOccupation,
    ordering: SpinOrdering,
) -> Result<(ShiftParams, SplitHamiltonian), ShiftError> {
    let l = h.qubit_count();
    let hf_like = 0u64; // commutation does not depend on the sector value
    for s in SymmetryOperator::standard_set(l, ordering, hf_like)
        .into_iter()
        .filter(|s| s.kind != SymmetryKind::Parity)
    {
        if !commutes_with(h, &s)? {
            return Err(ShiftError::SymmetryViolation(s.kind));
        }
    }

    let model = MuModel::build(h, ordering);
    let mut best: ([f64; 3], f64) = ([0.0; 3], model.mu(&[0.0; 3]));
    let grid = [-0.2, -0.1, -0.05, 0.0, 0.05, 0.1, 0.2];
    let mut starts: Vec<[f64; 3]> = vec![[0.0; 3]];
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                starts.push([a, b, c]);
            }
        }
    }
    for start in starts {
        let mut alpha = start;
        let mut current = model.mu(&alpha);
        loop {
            let mut improved = false;
            for coord in 0..3 {
                let mut cands = model.breakpoints(&alpha, coord);
                cands.push(alpha[coord]);
                let mut local_best = (alpha[coord], current);
                for v in cands {
                    if !v.is_finite() {
                        continue;
                    }
                    let mut trial = alpha;
                    trial[coord] = v;
                    let m = model.mu(&trial);
                    if m < local_best.1 - 1e-15 {
                        local_best = (v, m);
                    }
                }
                if local_best.1 < current - 1e-12 {
                    alpha[coord] = local_best.0;
                    current = local_best.1;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        if current < best.1 - 1e-12 {
            best = (alpha, current);
        }
    }

    let params = ShiftParams { alpha: best.0, sector };
    let shifted = apply_shift(h, &params, ordering);
    Ok((params, split(&shifted)))
}
