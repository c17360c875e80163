//! Dense linear algebra over the full 2^L Hilbert space.
//!
//! Everything here is an exact reference path: matrix builders for Pauli
//! sums, a complex Hermitian eigensolver (via the real symmetric embedding
//! [[A, -B], [B, A]]), matrix exponentials, and eigendecomposition of
//! unitaries through their commuting Hermitian and anti-Hermitian parts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::pauli::{AlgebraError, PauliHamiltonian, PauliString};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const DENSE_QUBIT_LIMIT: usize = 12;

/// Amplitude of `P|j>` landing on `|j ^ x_mask>`:
/// `i^{#Y} * (-1)^{popcount(j & (z|y))}`.
pub fn string_action(s: &PauliString, j: u64) -> Complex64 {
    let zy = s.z_mask();
    let sign = if (j & zy).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    let iy = match s.y_weight() % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    iy * sign
}

/// Dense matrix of a single Pauli string. Qubit q is bit q of the basis
/// index.
pub fn string_matrix(s: &PauliString) -> CMatrix {
    let dim = 1usize << s.len();
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..dim as u64 {
        let i = j ^ s.x_mask();
        m[(i as usize, j as usize)] = string_action(s, j);
    }
    m
}

/// Dense matrix of a full Hamiltonian.
pub fn hamiltonian_matrix(h: &PauliHamiltonian) -> CMatrix {
    let l = h.qubit_count();
    assert!(l <= DENSE_QUBIT_LIMIT, "dense bound exceeded");
    let dim = 1usize << l;
    let mut m = CMatrix::identity(dim, dim) * Complex64::new(h.identity_offset(), 0.0);
    for t in h.terms() {
        for j in 0..dim as u64 {
            let i = j ^ t.string.x_mask();
            m[(i as usize, j as usize)] += string_action(&t.string, j) * t.coefficient;
        }
    }
    m
}

/// Apply `H` to a state without forming the matrix.
pub fn apply_hamiltonian(h: &PauliHamiltonian, psi: &[Complex64], out: &mut [Complex64]) {
    let off = Complex64::new(h.identity_offset(), 0.0);
    for (o, p) in out.iter_mut().zip(psi.iter()) {
        *o = off * p;
    }
    for t in h.terms() {
        let c = Complex64::new(t.coefficient, 0.0);
        let x = t.string.x_mask();
        for j in 0..psi.len() as u64 {
            let i = j ^ x;
            out[i as usize] += c * string_action(&t.string, j) * psi[j as usize];
        }
    }
}

/// Eigendecomposition of a complex Hermitian matrix. Returns eigenvalues in
/// ascending order with orthonormal eigenvectors as matrix columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    // Real symmetric embedding: H = A + iB with Aᵀ = A, Bᵀ = -B maps to
    // [[A, -B], [B, A]]; each eigenvalue of H appears twice, and the real
    // eigenvector (u; v) corresponds to the complex eigenvector u + iv.
    let mut emb = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let c = m[(i, j)];
            emb[(i, j)] = c.re;
            emb[(n + i, n + j)] = c.re;
            emb[(i, n + j)] = -c.im;
            emb[(n + i, j)] = c.im;
        }
    }
    let se = nalgebra::SymmetricEigen::new(emb);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());

    // Every eigenvalue of H appears twice in the embedding; a real
    // eigenvector (u; v) and its partner (-v; u) map to the same complex
    // line, so each cluster of 2m real eigenpairs yields an m-dimensional
    // complex eigenspace. Build it by greedy orthonormalization over the
    // cluster's complex images, dropping dependent candidates.
    let scale = order
        .iter()
        .fold(1.0_f64, |a, &i| a.max(se.eigenvalues[i].abs()));
    let tol = 1e-9 * scale.max(1.0);
    let mut values = Vec::with_capacity(n);
    let mut vectors = CMatrix::zeros(n, n);
    let mut filled = 0usize;
    let mut start = 0usize;
    while start < 2 * n {
        let mut end = start + 1;
        while end < 2 * n
            && (se.eigenvalues[order[end]] - se.eigenvalues[order[start]]).abs() <= tol
        {
            end += 1;
        }
        debug_assert!((end - start) % 2 == 0, "embedded multiplicities are even");
        let want = (end - start) / 2;
        // Pivoted selection: keep all candidates' residuals against the
        // chosen set and always take the largest. The candidate images of an
        // orthonormal real basis satisfy Σ xx† = 2·P, so after k picks the
        // best remaining residual norm is at least 1/sqrt(m).
        let mut cands: Vec<Vec<Complex64>> = order[start..end]
            .iter()
            .map(|&idx| {
                let col = se.eigenvectors.column(idx);
                (0..n).map(|i| Complex64::new(col[i], col[n + i])).collect()
            })
            .collect();
        for taken in 0..want {
            let (best, _) = cands
                .iter()
                .enumerate()
                .map(|(k, c)| (k, c.iter().map(|x| x.norm_sqr()).sum::<f64>()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("candidates remain");
            let chosen = cands.swap_remove(best);
            let norm: f64 = chosen.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            assert!(norm > 1e-6, "eigenspace extraction rank deficit");
            let col = filled + taken;
            for (i, c) in chosen.iter().enumerate() {
                vectors[(i, col)] = c / norm;
            }
            for cand in cands.iter_mut() {
                let proj: Complex64 =
                    (0..n).map(|i| vectors[(i, col)].conj() * cand[i]).sum();
                for (i, c) in cand.iter_mut().enumerate() {
                    *c -= proj * vectors[(i, col)];
                }
            }
        }
        for _ in 0..want {
            values.push(se.eigenvalues[order[start]]);
        }
        filled += want;
        start = end;
    }
    (values, vectors)
}

/// exp(i t H) for Hermitian H, via the spectral decomposition.
pub fn exp_i_hermitian(m: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut d = CMatrix::zeros(n, n);
    for (k, v) in vals.iter().enumerate() {
        d[(k, k)] = Complex64::from_polar(1.0, v * t);
    }
    &vecs * d * vecs.adjoint()
}

/// Lowest eigenpair of the full dense Hamiltonian.
pub fn ground_state(h: &PauliHamiltonian) -> Result<(f64, CVector), AlgebraError> {
    if h.qubit_count() > DENSE_QUBIT_LIMIT {
        return Err(AlgebraError::DimensionTooLarge(h.qubit_count()));
    }
    let m = hamiltonian_matrix(h);
    let (vals, vecs) = hermitian_eigen(&m);
    Ok((vals[0], vecs.column(0).into_owned()))
}

/// Lowest eigenpair restricted to the subspace of basis states with the
/// same per-mask occupation counts as `reference_bits`. Masks typically
/// carry the spin-up and spin-down qubits, so this is the fixed
/// (n_up, n_down) block. Returns the energy and the full-space eigenvector.
pub fn ground_state_in_sector(
    h: &PauliHamiltonian,
    reference_bits: u64,
    masks: &[u64],
) -> Result<(f64, CVector), AlgebraError> {
    let l = h.qubit_count();
    if l > DENSE_QUBIT_LIMIT {
        return Err(AlgebraError::DimensionTooLarge(l));
    }
    let dim = 1usize << l;
    let counts: Vec<u32> = masks.iter().map(|m| (reference_bits & m).count_ones()).collect();
    let members: Vec<usize> = (0..dim)
        .filter(|&i| {
            masks
                .iter()
                .zip(&counts)
                .all(|(m, c)| (i as u64 & m).count_ones() == *c)
        })
        .collect();
    let full = hamiltonian_matrix(h);
    let k = members.len();
    let mut block = CMatrix::zeros(k, k);
    for (a, &i) in members.iter().enumerate() {
        for (b, &j) in members.iter().enumerate() {
            block[(a, b)] = full[(i, j)];
        }
    }
    let (vals, vecs) = hermitian_eigen(&block);
    let mut state = CVector::zeros(dim);
    for (a, &i) in members.iter().enumerate() {
        state[i] = vecs[(a, 0)];
    }
    Ok((vals[0], state))
}

/// Eigendecomposition of a (normal) unitary matrix. Diagonalizes the
/// Hermitian part, then splits degenerate clusters with the anti-Hermitian
/// part; returns unit-modulus eigenvalues with orthonormal eigenvectors.
pub fn unitary_eigen(u: &CMatrix) -> (Vec<Complex64>, CMatrix) {
    let n = u.nrows();
    let ud = u.adjoint();
    let h = (u + &ud).map(|c| c * 0.5);
    let s = (u - &ud).map(|c| c * Complex64::new(0.0, -0.5));
    let (hvals, hvecs) = hermitian_eigen(&h);
    let mut vectors = hvecs;
    let tol = 1e-8;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (hvals[end] - hvals[start]).abs() <= tol {
            end += 1;
        }
        if end - start > 1 {
            // diagonalize S restricted to the cluster
            let k = end - start;
            let block_basis = vectors.columns(start, k).into_owned();
            let s_block = block_basis.adjoint() * &s * &block_basis;
            let (_, svecs) = hermitian_eigen(&s_block);
            let rotated = &block_basis * svecs;
            vectors.columns_mut(start, k).copy_from(&rotated);
        }
        start = end;
    }
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let col = vectors.column(k);
        let uv = u * col;
        let lambda: Complex64 = col.iter().zip(uv.iter()).map(|(a, b)| a.conj() * b).sum();
        values.push(lambda / lambda.norm());
    }
    (values, vectors)
}

/// Largest singular value (operator norm).
pub fn operator_norm(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    let (vals, _) = hermitian_eigen(&g);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}
