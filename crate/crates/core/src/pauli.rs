//! Pauli-string algebra and the text Hamiltonian format.
//!
//! A Hamiltonian is a real identity offset plus a sum of weighted Pauli
//! strings, H = c·I + Σₙ aₙ Pₙ. Strings are stored symplectically as an
//! (x, z) bit-mask pair; qubit 1 is the leftmost label character and bit 0
//! of the masks.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

/// Single-qubit Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    pub fn label(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Axis::I,
            (true, false) => Axis::X,
            (true, true) => Axis::Y,
            (false, true) => Axis::Z,
        }
    }
}

/// Errors from parsing the Hamiltonian text format.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: string length {found} differs from {expected}")]
    LengthMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: invalid axis character '{ch}'")]
    InvalidAxisChar { line: usize, ch: char },
    #[error("line {line}: duplicate Pauli string")]
    DuplicateString { line: usize },
    #[error("line {line}: malformed number '{token}'")]
    MalformedNumber { line: usize, token: String },
    #[error("line {line}: identity offset given more than once")]
    DuplicateOffset { line: usize },
    #[error("empty Hamiltonian document")]
    Empty,
}

/// Errors from Pauli algebra on mismatched operands.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AlgebraError {
    #[error("string lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("dimension 2^{0} exceeds the dense bound")]
    DimensionTooLarge(usize),
}

/// A fixed-length Pauli string in symplectic form.
///
/// Bit q of `x`/`z` gives the axis on qubit q: `00 = I`, `10 = X`,
/// `11 = Y`, `01 = Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    x: u64,
    z: u64,
    len: u8,
}

impl PauliString {
    pub fn identity(len: usize) -> Self {
        assert!(len <= 64);
        Self { x: 0, z: 0, len: len as u8 }
    }

    pub fn from_masks(x: u64, z: u64, len: usize) -> Self {
        assert!(len <= 64);
        let keep = mask_of(len);
        Self { x: x & keep, z: z & keep, len: len as u8 }
    }

    /// Parse a label such as `"IXYZ"`. Returns the offending character on
    /// failure.
    pub fn parse(label: &str) -> Result<Self, char> {
        let mut x = 0u64;
        let mut z = 0u64;
        let mut len = 0usize;
        for (q, ch) in label.chars().enumerate() {
            match ch {
                'I' => {}
                'X' => x |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                'Z' => z |= 1 << q,
                other => return Err(other),
            }
            len = q + 1;
        }
        Ok(Self { x, z, len: len as u8 })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn axis(&self, qubit: usize) -> Axis {
        Axis::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    pub fn set_axis(&mut self, qubit: usize, axis: Axis) {
        let bit = 1u64 << qubit;
        self.x &= !bit;
        self.z &= !bit;
        match axis {
            Axis::I => {}
            Axis::X => self.x |= bit,
            Axis::Y => {
                self.x |= bit;
                self.z |= bit;
            }
            Axis::Z => self.z |= bit,
        }
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        ((self.x | self.z) & mask_of(self.len())).count_ones() as usize
    }

    /// Number of X or Y positions.
    pub fn xy_weight(&self) -> usize {
        self.x.count_ones() as usize
    }

    /// Number of Y positions.
    pub fn y_weight(&self) -> usize {
        (self.x & self.z).count_ones() as usize
    }

    /// Number of pure-Z positions.
    pub fn z_weight(&self) -> usize {
        (self.z & !self.x).count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// True when every non-identity position is a Z.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        anti % 2 == 0
    }

    pub fn label(&self) -> String {
        (0..self.len()).map(|q| self.axis(q).label()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let label = String::deserialize(d)?;
        PauliString::parse(&label)
            .map_err(|ch| serde::de::Error::custom(format!("invalid axis character '{ch}'")))
    }
}

fn mask_of(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Fourth root of unity, i^k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase(pub u8);

impl Phase {
    pub fn to_complex(self) -> Complex64 {
        match self.0 & 3 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

/// Product of two Pauli strings with its phase: `P·Q = i^k · R`.
pub fn pauli_product(p: &PauliString, q: &PauliString) -> Result<(Phase, PauliString), AlgebraError> {
    if p.len() != q.len() {
        return Err(AlgebraError::LengthMismatch(p.len(), q.len()));
    }
    // Single-qubit products: XZ = -iY, ZX = iY, XY = iZ, YX = -iZ,
    // YZ = iX, ZY = -iX. Work positionwise and accumulate the exponent of i.
    let mut k = 0u32;
    for qb in 0..p.len() {
        k += axis_phase(p.axis(qb), q.axis(qb)) as u32;
    }
    let r = PauliString::from_masks(p.x ^ q.x, p.z ^ q.z, p.len());
    Ok((Phase((k & 3) as u8), r))
}

fn axis_phase(a: Axis, b: Axis) -> u8 {
    use Axis::*;
    match (a, b) {
        (X, Y) | (Y, Z) | (Z, X) => 1,
        (Y, X) | (Z, Y) | (X, Z) => 3,
        _ => 0,
    }
}

/// One weighted term of a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: PauliString) -> Self {
        Self { coefficient, string }
    }
}

/// A real Pauli-sum Hamiltonian with an explicit identity offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    qubit_count: usize,
    identity_offset: f64,
    terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    /// Build from parts, enforcing the representation invariants: every
    /// string has the advertised length, none is the identity, none repeats,
    /// and all coefficients are finite.
    pub fn new(
        qubit_count: usize,
        identity_offset: f64,
        terms: Vec<PauliTerm>,
    ) -> Result<Self, ParseError> {
        let mut seen = std::collections::BTreeSet::new();
        for (i, t) in terms.iter().enumerate() {
            let line = i + 1;
            if t.string.len() != qubit_count {
                return Err(ParseError::LengthMismatch {
                    line,
                    expected: qubit_count,
                    found: t.string.len(),
                });
            }
            if t.string.is_identity() {
                return Err(ParseError::DuplicateOffset { line });
            }
            if !t.coefficient.is_finite() {
                return Err(ParseError::MalformedNumber { line, token: t.coefficient.to_string() });
            }
            if !seen.insert((t.string.x, t.string.z)) {
                return Err(ParseError::DuplicateString { line });
            }
        }
        Ok(Self { qubit_count, identity_offset, terms })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn identity_offset(&self) -> f64 {
        self.identity_offset
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn mean_weight(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        self.terms.iter().map(|t| t.string.weight() as f64).sum::<f64>() / self.terms.len() as f64
    }

    pub fn weight_std(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let mean = self.mean_weight();
        let var = self
            .terms
            .iter()
            .map(|t| (t.string.weight() as f64 - mean).powi(2))
            .sum::<f64>()
            / self.terms.len() as f64;
        var.sqrt()
    }

    /// Sum of |aₙ| over all non-identity terms.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// Parse the text format: `#` comments, one bare real for the identity
    /// offset, and `<real> <IXYZ string>` per term.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut offset: Option<f64> = None;
        let mut terms: Vec<(usize, PauliTerm)> = Vec::new();
        let mut width: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut fields = body.split_whitespace();
            let num_tok = fields.next().expect("non-empty line has a first field");
            let coeff: f64 = num_tok
                .parse()
                .map_err(|_| ParseError::MalformedNumber { line, token: num_tok.to_string() })?;
            match fields.next() {
                None => {
                    if offset.is_some() {
                        return Err(ParseError::DuplicateOffset { line });
                    }
                    offset = Some(coeff);
                }
                Some(label) => {
                    if fields.next().is_some() {
                        return Err(ParseError::MalformedNumber { line, token: body.to_string() });
                    }
                    let string = PauliString::parse(label)
                        .map_err(|ch| ParseError::InvalidAxisChar { line, ch })?;
                    if let Some(w) = width {
                        if string.len() != w {
                            return Err(ParseError::LengthMismatch {
                                line,
                                expected: w,
                                found: string.len(),
                            });
                        }
                    } else {
                        width = Some(string.len());
                    }
                    terms.push((line, PauliTerm::new(coeff, string)));
                }
            }
        }
        let width = match width {
            Some(w) => w,
            None if offset.is_some() => 0,
            None => return Err(ParseError::Empty),
        };
        let mut seen = std::collections::BTreeSet::new();
        for (line, t) in &terms {
            if t.string.is_identity() {
                return Err(ParseError::DuplicateOffset { line: *line });
            }
            if !seen.insert((t.string.x, t.string.z)) {
                return Err(ParseError::DuplicateString { line: *line });
            }
        }
        Ok(Self {
            qubit_count: width,
            identity_offset: offset.unwrap_or(0.0),
            terms: terms.into_iter().map(|(_, t)| t).collect(),
        })
    }

    /// Canonical text form: offset line, then terms sorted by label.
    pub fn serialize_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}\n", self.identity_offset));
        let mut terms = self.terms.clone();
        terms.sort_by_key(|t| t.string.label());
        for t in &terms {
            out.push_str(&format!("{} {}\n", t.coefficient, t.string.label()));
        }
        out
    }

    /// Energy of a computational basis state: bit b_q = 1 means <Z_q> = -1.
    /// Off-diagonal terms contribute nothing.
    pub fn expectation_in_basis_state(&self, bits: u64, len: usize) -> Result<f64, AlgebraError> {
        if len != self.qubit_count {
            return Err(AlgebraError::LengthMismatch(len, self.qubit_count));
        }
        let mut e = self.identity_offset;
        for t in &self.terms {
            if !t.string.is_diagonal() {
                continue;
            }
            let sign = if (t.string.z_mask() & bits).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            e += t.coefficient * sign;
        }
        Ok(e)
    }

    /// Merge duplicate strings, drop terms with |a| below `tol`, and fold
    /// identity strings into the offset.
    pub fn merged(qubit_count: usize, offset: f64, raw: Vec<PauliTerm>, tol: f64) -> Self {
        let mut acc: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        let mut c0 = offset;
        for t in raw {
            if t.string.is_identity() {
                c0 += t.coefficient;
            } else {
                *acc.entry((t.string.x, t.string.z)).or_insert(0.0) += t.coefficient;
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.abs() >= tol)
            .map(|((x, z), c)| PauliTerm::new(c, PauliString::from_masks(x, z, qubit_count)))
            .collect();
        Self { qubit_count, identity_offset: c0, terms }
    }

    /// Sum of two Hamiltonians over the same register.
    pub fn add(&self, other: &PauliHamiltonian, tol: f64) -> PauliHamiltonian {
        assert_eq!(self.qubit_count, other.qubit_count);
        let mut raw = self.terms.clone();
        raw.extend_from_slice(&other.terms);
        Self::merged(self.qubit_count, self.identity_offset + other.identity_offset, raw, tol)
    }

    pub fn scaled(&self, factor: f64) -> PauliHamiltonian {
        Self {
            qubit_count: self.qubit_count,
            identity_offset: self.identity_offset * factor,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm::new(t.coefficient * factor, t.string))
                .collect(),
        }
    }
}

/// Conserved quantities of the electronic Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryKind {
    Parity,
    NumberUp,
    NumberDown,
    NumberTotal,
}

/// Assignment of spin orbitals to qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpinOrdering {
    /// All spin-up orbitals first, then all spin-down.
    Blocked,
    /// Orbital-major: (orb 1, up), (orb 1, down), (orb 2, up), ...
    Interleaved,
}

impl SpinOrdering {
    /// Qubit index of a (spatial orbital, spin) pair; spin 0 = up.
    pub fn qubit_index(&self, orbital: usize, spin: usize, n_orbitals: usize) -> usize {
        match self {
            SpinOrdering::Blocked => orbital + spin * n_orbitals,
            SpinOrdering::Interleaved => 2 * orbital + spin,
        }
    }

    /// Qubits carrying the given spin sector on an `l`-qubit register.
    pub fn sector_qubits(&self, spin: usize, l: usize) -> Vec<usize> {
        assert!(l % 2 == 0);
        (0..l / 2).map(|orb| self.qubit_index(orb, spin, l / 2)).collect()
    }
}

/// A conserved operator together with its eigenvalue on the reference sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryOperator {
    pub kind: SymmetryKind,
    pub operator: PauliHamiltonian,
    pub sector_value: f64,
}

impl SymmetryOperator {
    /// The all-Z parity string with coefficient 1.
    pub fn parity(l: usize, sector_value: f64) -> Self {
        let string = PauliString::from_masks(0, mask_of(l), l);
        let operator =
            PauliHamiltonian::new(l, 0.0, vec![PauliTerm::new(1.0, string)]).expect("valid");
        Self { kind: SymmetryKind::Parity, operator, sector_value }
    }

    /// Number operator Σ (I - Z_q)/2 over the given qubits.
    pub fn number(kind: SymmetryKind, qubits: &[usize], l: usize, sector_value: f64) -> Self {
        let mut terms = Vec::new();
        for &q in qubits {
            let mut s = PauliString::identity(l);
            s.set_axis(q, Axis::Z);
            terms.push(PauliTerm::new(-0.5, s));
        }
        let operator =
            PauliHamiltonian::merged(l, qubits.len() as f64 * 0.5, terms, 0.0);
        Self { kind, operator, sector_value }
    }

    /// The standard set {parity, n_up, n_down, n_total} for an electronic
    /// register under the given spin ordering and reference occupation.
    pub fn standard_set(l: usize, ordering: SpinOrdering, hf_bits: u64) -> Vec<SymmetryOperator> {
        let up = ordering.sector_qubits(0, l);
        let down = ordering.sector_qubits(1, l);
        let count = |qs: &[usize]| qs.iter().filter(|&&q| hf_bits >> q & 1 == 1).count() as f64;
        let n_up = count(&up);
        let n_down = count(&down);
        let eta = if (hf_bits & mask_of(l)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let all: Vec<usize> = (0..l).collect();
        vec![
            SymmetryOperator::parity(l, eta),
            SymmetryOperator::number(SymmetryKind::NumberUp, &up, l, n_up),
            SymmetryOperator::number(SymmetryKind::NumberDown, &down, l, n_down),
            SymmetryOperator::number(SymmetryKind::NumberTotal, &all, l, n_up + n_down),
        ]
    }
}

/// Check [H, S] = 0. Uses the dense commutator for small registers and
/// exact symbolic cancellation otherwise.
pub fn commutes_with(h: &PauliHamiltonian, s: &SymmetryOperator) -> Result<bool, AlgebraError> {
    if h.qubit_count() != s.operator.qubit_count() {
        return Err(AlgebraError::LengthMismatch(h.qubit_count(), s.operator.qubit_count()));
    }
    if h.qubit_count() <= 8 {
        let hm = crate::dense::hamiltonian_matrix(h);
        let sm = crate::dense::hamiltonian_matrix(&s.operator);
        let comm = &hm * &sm - &sm * &hm;
        let max = comm.iter().map(|c| c.norm()).fold(0.0, f64::max);
        return Ok(max <= 1e-10);
    }
    Ok(symbolic_commutator_norm(h, &s.operator) <= 1e-10)
}

/// Max |coefficient| of the Pauli expansion of [A, B].
pub fn symbolic_commutator_norm(a: &PauliHamiltonian, b: &PauliHamiltonian) -> f64 {
    let mut acc: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
    for ta in a.terms() {
        for tb in b.terms() {
            if ta.string.commutes_with(&tb.string) {
                continue;
            }
            // [P,Q] = PQ - QP = 2 PQ for anticommuting strings
            let (phase, r) = pauli_product(&ta.string, &tb.string).expect("equal lengths");
            let c = phase.to_complex() * 2.0 * ta.coefficient * tb.coefficient;
            let e = acc.entry((r.x_mask(), r.z_mask())).or_insert(Complex64::new(0.0, 0.0));
            *e += c;
        }
    }
    acc.values().map(|c| c.norm()).fold(0.0, f64::max)
}
