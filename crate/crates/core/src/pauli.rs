//! Pauli strings and sums of Pauli strings.
//!
//! Qubit `q` of a register of `n` qubits is stored at bit `q` of the
//! masks. Statevector amplitudes use the opposite layout (qubit 0 is the most
//! significant bit of the basis index), so every conversion to amplitude space
//! goes through [`PauliString::index_masks`].

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients smaller than this are dropped by [`QubitOperator::simplify`].
pub const DROP_TOLERANCE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `i^k` for `k` taken modulo 4.
pub fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A Pauli word `i^{|x&z|} X^x Z^z`, so that a qubit with both bits set holds `Y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn single(qubit: usize, axis: Axis) -> Self {
        let bit = 1u64 << qubit;
        match axis {
            Axis::X => PauliString { x: bit, z: 0 },
            Axis::Y => PauliString { x: bit, z: bit },
            Axis::Z => PauliString { x: 0, z: bit },
        }
    }

    pub fn from_word(word: &[(usize, Axis)]) -> Self {
        word.iter().fold(Self::IDENTITY, |acc, &(q, a)| {
            let s = Self::single(q, a);
            PauliString { x: acc.x ^ s.x, z: acc.z ^ s.z }
        })
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Highest qubit index touched, if any.
    pub fn max_qubit(&self) -> Option<usize> {
        let m = self.x | self.z;
        (m != 0).then(|| 63 - m.leading_zeros() as usize)
    }

    pub fn axis(&self, qubit: usize) -> Option<Axis> {
        let xb = (self.x >> qubit) & 1 == 1;
        let zb = (self.z >> qubit) & 1 == 1;
        match (xb, zb) {
            (false, false) => None,
            (true, false) => Some(Axis::X),
            (true, true) => Some(Axis::Y),
            (false, true) => Some(Axis::Z),
        }
    }

    /// Word with strictly increasing qubit indices.
    pub fn word(&self) -> Vec<(usize, Axis)> {
        (0..64).filter_map(|q| self.axis(q).map(|a| (q, a))).collect()
    }

    /// Product `self * other = i^k * result`; returns `(k mod 4, result)`.
    pub fn mul(&self, other: &PauliString) -> (u32, PauliString) {
        let out = PauliString { x: self.x ^ other.x, z: self.z ^ other.z };
        let k = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones()
            + 3 * out.y_count();
        (k % 4, out)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Masks in amplitude-index space for an `n`-qubit register.
    pub fn index_masks(&self, n: usize) -> (usize, usize) {
        let mut xi = 0usize;
        let mut zi = 0usize;
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            if (self.x >> q) & 1 == 1 {
                xi |= bit;
            }
            if (self.z >> q) & 1 == 1 {
                zi |= bit;
            }
        }
        (xi, zi)
    }

    /// Dense `2^n x 2^n` matrix. Only meant for small registers.
    pub fn to_dense(&self, n: usize) -> DMatrix<Complex64> {
        let dim = 1usize << n;
        let (xi, zi) = self.index_masks(n);
        let ph = i_pow(self.y_count());
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let sign = if (zi & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(b ^ xi, b)] = ph * sign;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self
            .word()
            .into_iter()
            .map(|(q, a)| format!("{a:?}{q}"))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// One weighted Pauli word, the unit measured when averaging a Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: Complex64,
    pub word: Vec<(usize, Axis)>,
}

impl PauliTerm {
    pub fn new(coefficient: Complex64, word: Vec<(usize, Axis)>) -> Result<Self> {
        if word.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("Pauli word qubit indices must be strictly increasing"));
        }
        Ok(PauliTerm { coefficient, word })
    }

    pub fn string(&self) -> PauliString {
        PauliString::from_word(&self.word)
    }
}

/// Sum of Pauli strings with merged coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitOperator {
    num_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl QubitOperator {
    pub fn zero(num_qubits: usize) -> Self {
        assert!(num_qubits <= 63, "at most 63 qubits are supported");
        QubitOperator { num_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self::term(num_qubits, PauliString::IDENTITY, ONE)
    }

    pub fn term(num_qubits: usize, p: PauliString, c: Complex64) -> Self {
        let mut op = Self::zero(num_qubits);
        op.add_term(p, c);
        op
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or(ZERO)
    }

    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        debug_assert!(p.max_qubit().map_or(true, |q| q < self.num_qubits));
        let e = self.terms.entry(p).or_insert(ZERO);
        *e += c;
        if e.norm() < DROP_TOLERANCE {
            self.terms.remove(&p);
        }
    }

    pub fn add_assign_op(&mut self, other: &QubitOperator) {
        for (p, c) in &other.terms {
            self.add_term(*p, *c);
        }
    }

    pub fn scale(&mut self, s: Complex64) {
        for c in self.terms.values_mut() {
            *c *= s;
        }
        self.simplify();
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn mul(&self, other: &QubitOperator) -> QubitOperator {
        let mut out = QubitOperator::zero(self.num_qubits.max(other.num_qubits));
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                let (k, p) = p1.mul(p2);
                out.add_term(p, c1 * c2 * i_pow(k));
            }
        }
        out
    }

    pub fn adjoint(&self) -> QubitOperator {
        QubitOperator {
            num_qubits: self.num_qubits,
            terms: self.terms.iter().map(|(p, c)| (*p, c.conj())).collect(),
        }
    }

    pub fn simplify(&mut self) {
        self.terms.retain(|_, c| c.norm() >= DROP_TOLERANCE);
    }

    /// Largest imaginary part among the coefficients; Pauli strings are
    /// Hermitian so this measures the anti-Hermitian part.
    pub fn hermiticity_error(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn terms(&self) -> Vec<PauliTerm> {
        self.terms
            .iter()
            .map(|(p, c)| PauliTerm { coefficient: *c, word: p.word() })
            .collect()
    }

    /// Identity coefficient.
    pub fn constant(&self) -> Complex64 {
        self.coefficient(&PauliString::IDENTITY)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.num_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, c) in &self.terms {
            m += p.to_dense(self.num_qubits) * *c;
        }
        m
    }

    /// Precomputed amplitude-space form for repeated application.
    pub fn compile(&self) -> CompiledOperator {
        let n = self.num_qubits;
        let terms = self
            .terms
            .iter()
            .map(|(p, c)| {
                let (xi, zi) = p.index_masks(n);
                CompiledTerm { x: xi, z: zi, coeff: c * i_pow(p.y_count()) }
            })
            .collect();
        CompiledOperator { num_qubits: n, terms }
    }
}

#[derive(Clone, Copy, Debug)]
struct CompiledTerm {
    x: usize,
    z: usize,
    coeff: Complex64,
}

/// A [`QubitOperator`] laid out for fast action on amplitude vectors.
#[derive(Clone, Debug)]
pub struct CompiledOperator {
    num_qubits: usize,
    terms: Vec<CompiledTerm>,
}

impl CompiledOperator {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// `out = O * amps`.
    pub fn apply(&self, amps: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(amps.len(), 1 << self.num_qubits);
        assert_eq!(out.len(), amps.len());
        out.iter_mut().for_each(|o| *o = ZERO);
        for t in &self.terms {
            for (b, a) in amps.iter().enumerate() {
                let v = if (t.z & b).count_ones() % 2 == 1 { -*a } else { *a };
                out[b ^ t.x] += t.coeff * v;
            }
        }
    }

    pub fn apply_vec(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; amps.len()];
        self.apply(amps, &mut out);
        out
    }

    /// Terms as `(x, z, c)` with `O|b> = sum c (-1)^{|z & b|} |b ^ x>`.
    pub fn masks(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.terms.iter().map(|t| (t.x, t.z, t.coeff))
    }

    /// `<amps|O|amps>` without allocating.
    pub fn expectation(&self, amps: &[Complex64]) -> Complex64 {
        let mut acc = ZERO;
        for t in &self.terms {
            let mut s = ZERO;
            for (b, a) in amps.iter().enumerate() {
                let v = if (t.z & b).count_ones() % 2 == 1 { -*a } else { *a };
                s += amps[b ^ t.x].conj() * v;
            }
            acc += t.coeff * s;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_matrix(a: Axis) -> DMatrix<Complex64> {
        let c = |r: f64, i: f64| Complex64::new(r, i);
        match a {
            Axis::X => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
            Axis::Y => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
            Axis::Z => DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        }
    }

    fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        a.kronecker(b)
    }

    #[test]
    fn dense_matches_kronecker_products_with_qubit0_most_significant() {
        let n = 3;
        let words = [
            vec![(0, Axis::X)],
            vec![(1, Axis::Y), (2, Axis::Z)],
            vec![(0, Axis::Y), (2, Axis::Y)],
        ];
        for w in words {
            let p = PauliString::from_word(&w);
            let mut expected = DMatrix::from_element(1, 1, ONE);
            for q in 0..n {
                let f = match p.axis(q) {
                    Some(a) => pauli_matrix(a),
                    None => DMatrix::identity(2, 2),
                };
                expected = kron(&expected, &f);
            }
            assert!((p.to_dense(n) - expected).norm() < 1e-14, "{p}");
        }
    }

    #[test]
    fn products_match_dense_multiplication() {
        let n = 3;
        let all: Vec<PauliString> = (0..64u64)
            .map(|k| PauliString { x: k & 7, z: k >> 3 })
            .collect();
        for a in &all {
            for b in all.iter().step_by(5) {
                let (k, c) = a.mul(b);
                let lhs = a.to_dense(n) * b.to_dense(n);
                let rhs = c.to_dense(n) * i_pow(k);
                assert!((lhs - rhs).norm() < 1e-12);
                let comm = a.to_dense(n) * b.to_dense(n) - b.to_dense(n) * a.to_dense(n);
                assert_eq!(a.commutes_with(b), comm.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn word_rejects_unsorted() {
        assert!(PauliTerm::new(ONE, vec![(2, Axis::X), (1, Axis::Z)]).is_err());
        assert!(PauliTerm::new(ONE, vec![(1, Axis::X), (1, Axis::Z)]).is_err());
    }

    #[test]
    fn operator_merges_and_drops_zero_terms() {
        let z0 = PauliString::single(0, Axis::Z);
        let mut op = QubitOperator::zero(2);
        op.add_term(z0, ONE);
        op.add_term(z0, -ONE);
        assert!(op.is_empty());
        op.add_term(z0, ONE);
        op.add_term(z0, ONE);
        assert_eq!(op.len(), 1);
        assert_eq!(op.coefficient(&z0), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn compiled_apply_matches_dense() {
        let mut op = QubitOperator::zero(3);
        op.add_term(PauliString::from_word(&[(0, Axis::X), (1, Axis::Y)]), Complex64::new(0.3, 0.0));
        op.add_term(PauliString::from_word(&[(2, Axis::Z)]), Complex64::new(-1.1, 0.0));
        op.add_term(PauliString::from_word(&[(0, Axis::Y), (2, Axis::X)]), Complex64::new(0.0, 0.7));
        let v: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64 * 0.1, 1.0 - k as f64 * 0.05)).collect();
        let dense = op.to_dense() * nalgebra::DVector::from_vec(v.clone());
        let fast = op.compile().apply_vec(&v);
        for (a, b) in dense.iter().zip(fast.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
        let e = op.compile().expectation(&v);
        let ed = nalgebra::DVector::from_vec(v.clone()).dotc(&dense);
        assert!((e - ed).norm() < 1e-12);
    }
}
