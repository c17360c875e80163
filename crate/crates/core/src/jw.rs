//! Jordan-Wigner encoding of second-quantized electronic Hamiltonians.
//!
//! The annihilation operator on spin orbital m maps to
//! c_m = Z_0 ... Z_{m-1} (X_m + iY_m)/2, so number operators become
//! (I - Z_m)/2 and the canonical anticommutation relations carry over.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::pauli::{pauli_product, PauliHamiltonian, PauliString, PauliTerm, SpinOrdering};

/// One- and two-body integrals over spatial orbitals.
///
/// The Hamiltonian encoded is
/// Σ_{ij,σ} t^σ_ij c†_{iσ} c_{jσ}
///   + ½ Σ_{ijkl,σσ'} t^{σσ'}_{ijkl} c†_{iσ} c†_{jσ'} c_{kσ} c_{lσ'}.
#[derive(Debug, Clone)]
pub struct IntegralTable {
    pub n_orbitals: usize,
    /// `one_body[spin][i * n + j]` = t^σ_ij
    pub one_body: [Vec<f64>; 2],
    /// `two_body[2*σ + σ'][((i n + j) n + k) n + l]` = t^{σσ'}_{ijkl}
    pub two_body: [Vec<f64>; 4],
    pub ordering: SpinOrdering,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum IntegralError {
    #[error("one-body block for spin {0} is not symmetric at ({1},{2})")]
    NotSymmetric(usize, usize, usize),
    #[error("array size mismatch")]
    BadShape,
    #[error("non-finite integral value")]
    NotFinite,
}

impl IntegralTable {
    pub fn zeros(n_orbitals: usize, ordering: SpinOrdering) -> Self {
        let n2 = n_orbitals * n_orbitals;
        let n4 = n2 * n2;
        Self {
            n_orbitals,
            one_body: [vec![0.0; n2], vec![0.0; n2]],
            two_body: [vec![0.0; n4], vec![0.0; n4], vec![0.0; n4], vec![0.0; n4]],
            ordering,
        }
    }

    pub fn set_one_body(&mut self, spin: usize, i: usize, j: usize, v: f64) {
        let n = self.n_orbitals;
        self.one_body[spin][i * n + j] = v;
        self.one_body[spin][j * n + i] = v;
    }

    pub fn set_two_body(&mut self, s1: usize, s2: usize, ijkl: (usize, usize, usize, usize), v: f64) {
        let n = self.n_orbitals;
        let (i, j, k, l) = ijkl;
        self.two_body[2 * s1 + s2][((i * n + j) * n + k) * n + l] = v;
    }

    pub fn validate(&self) -> Result<(), IntegralError> {
        let n = self.n_orbitals;
        for (s, block) in self.one_body.iter().enumerate() {
            if block.len() != n * n {
                return Err(IntegralError::BadShape);
            }
            for i in 0..n {
                for j in 0..i {
                    if (block[i * n + j] - block[j * n + i]).abs() > 1e-12 {
                        return Err(IntegralError::NotSymmetric(s, i, j));
                    }
                }
            }
        }
        for block in &self.two_body {
            if block.len() != n * n * n * n {
                return Err(IntegralError::BadShape);
            }
            if block.iter().any(|v| !v.is_finite()) {
                return Err(IntegralError::NotFinite);
            }
        }
        Ok(())
    }
}

/// A complex operator held as a Pauli expansion, used while multiplying
/// ladder operators.
#[derive(Debug, Clone, Default)]
pub struct PauliExpansion {
    terms: BTreeMap<(u64, u64), Complex64>,
    len: usize,
}

impl PauliExpansion {
    pub fn zero(len: usize) -> Self {
        Self { terms: BTreeMap::new(), len }
    }

    fn insert(&mut self, s: PauliString, c: Complex64) {
        let e = self.terms.entry((s.x_mask(), s.z_mask())).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
    }

    /// Ladder operator c_m (annihilation) or c†_m.
    pub fn ladder(m: usize, dagger: bool, len: usize) -> Self {
        let mut string_x = PauliString::identity(len);
        let mut string_y = PauliString::identity(len);
        for q in 0..m {
            string_x.set_axis(q, crate::pauli::Axis::Z);
            string_y.set_axis(q, crate::pauli::Axis::Z);
        }
        string_x.set_axis(m, crate::pauli::Axis::X);
        string_y.set_axis(m, crate::pauli::Axis::Y);
        let mut out = Self::zero(len);
        out.insert(string_x, Complex64::new(0.5, 0.0));
        let y_coeff = if dagger { Complex64::new(0.0, -0.5) } else { Complex64::new(0.0, 0.5) };
        out.insert(string_y, y_coeff);
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero(self.len);
        for (&(xa, za), &ca) in &self.terms {
            let a = PauliString::from_masks(xa, za, self.len);
            for (&(xb, zb), &cb) in &rhs.terms {
                let b = PauliString::from_masks(xb, zb, self.len);
                let (phase, r) = pauli_product(&a, &b).expect("equal lengths");
                out.insert(r, ca * cb * phase.to_complex());
            }
        }
        out
    }

    pub fn add_scaled(&mut self, rhs: &Self, factor: Complex64) {
        for (&key, &c) in &rhs.terms {
            let e = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
            *e += c * factor;
        }
    }

    /// Convert to a real Hamiltonian; fails if any imaginary residue exceeds
    /// the tolerance (Hermiticity check).
    pub fn into_hamiltonian(self, tol: f64) -> Result<PauliHamiltonian, IntegralError> {
        let mut offset = 0.0;
        let mut terms = Vec::new();
        for ((x, z), c) in self.terms {
            if c.im.abs() > tol {
                return Err(IntegralError::NotFinite);
            }
            if c.re.abs() < tol {
                continue;
            }
            let s = PauliString::from_masks(x, z, self.len);
            if s.is_identity() {
                offset += c.re;
            } else {
                terms.push(PauliTerm::new(c.re, s));
            }
        }
        Ok(PauliHamiltonian::merged(self.len, offset, terms, 0.0))
    }
}

/// Map an integral table to its qubit Hamiltonian.
pub fn jordan_wigner(t: &IntegralTable) -> Result<PauliHamiltonian, IntegralError> {
    t.validate()?;
    let n = t.n_orbitals;
    let l = 2 * n;
    let q = |orb: usize, spin: usize| t.ordering.qubit_index(orb, spin, n);
    let mut acc = PauliExpansion::zero(l);
    for spin in 0..2 {
        for i in 0..n {
            for j in 0..n {
                let v = t.one_body[spin][i * n + j];
                if v == 0.0 {
                    continue;
                }
                let op = PauliExpansion::ladder(q(i, spin), true, l)
                    .mul(&PauliExpansion::ladder(q(j, spin), false, l));
                acc.add_scaled(&op, Complex64::new(v, 0.0));
            }
        }
    }
    for s1 in 0..2 {
        for s2 in 0..2 {
            let block = &t.two_body[2 * s1 + s2];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for m in 0..n {
                            let v = block[((i * n + j) * n + k) * n + m];
                            if v == 0.0 {
                                continue;
                            }
                            let op = PauliExpansion::ladder(q(i, s1), true, l)
                                .mul(&PauliExpansion::ladder(q(j, s2), true, l))
                                .mul(&PauliExpansion::ladder(q(k, s1), false, l))
                                .mul(&PauliExpansion::ladder(q(m, s2), false, l));
                            acc.add_scaled(&op, Complex64::new(0.5 * v, 0.0));
                        }
                    }
                }
            }
        }
    }
    acc.into_hamiltonian(1e-12)
}
