//! Majorana-operator form of a Hamiltonian,
//!
//! ```text
//! H = offset + i sum_pq T_pq g_p g_q + sum_pqrs V_pqrs g_p g_q g_s g_r (+ sextic part)
//! ```
//!
//! with `T` real antisymmetric and `V` real and fully antisymmetric.
//! Majorana index `k < M` is `g^A_k = a+_k + a_k`, `k >= M` is
//! `g^B_{k-M} = -i(a+ - a)`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::{FermionOperator, HamiltonianSpec, Ladder};

/// Product of distinct Majorana operators in increasing index order.
type Monomial = u64;

/// `g_{m1} g_{m2} = sign * g_{m1 ^ m2}` with both factors in sorted order.
fn monomial_mul(m1: Monomial, m2: Monomial) -> (f64, Monomial) {
    let mut swaps = 0u32;
    let mut rest = m2;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j >= 63 { 0 } else { m1 >> (j + 1) };
        swaps += above.count_ones();
    }
    (if swaps % 2 == 0 { 1.0 } else { -1.0 }, m1 ^ m2)
}

fn indices(m: Monomial) -> Vec<usize> {
    (0..64).filter(|k| (m >> k) & 1 == 1).collect()
}

/// Expands every monomial into sorted Majorana products.
pub fn majorana_expansion(op: &FermionOperator) -> Result<BTreeMap<Monomial, Complex64>> {
    op.validate()?;
    if op.modes > 32 {
        return Err(Error::Unsupported("more than 32 modes".into()));
    }
    let m = op.modes;
    let half = Complex64::new(0.5, 0.0);
    let ihalf = Complex64::new(0.0, 0.5);
    let mut out: BTreeMap<Monomial, Complex64> = BTreeMap::new();
    for t in &op.terms {
        let mut acc: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        acc.insert(0, t.coeff);
        for o in &t.ops {
            // a+ = (gA + i gB)/2, a = (gA - i gB)/2
            let b_coeff = match o.kind {
                Ladder::Create => ihalf,
                Ladder::Annihilate => -ihalf,
            };
            let factors = [(1u64 << o.mode, half), (1u64 << (o.mode + m), b_coeff)];
            let mut next: BTreeMap<Monomial, Complex64> = BTreeMap::new();
            for (&mono, &c) in &acc {
                for &(f, fc) in &factors {
                    let (s, prod) = monomial_mul(mono, f);
                    *next.entry(prod).or_default() += c * fc * s;
                }
            }
            acc = next;
        }
        for (k, c) in acc {
            *out.entry(k).or_default() += c;
        }
    }
    out.retain(|_, c| c.norm() > 1e-14);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MajoranaHamiltonian {
    pub modes: usize,
    pub offset: f64,
    /// Real antisymmetric `2M x 2M`.
    pub t: DMatrix<f64>,
    /// Coefficients `c` of `c g_a g_b g_c g_d`, `a < b < c < d`.
    pub quartic: Vec<([usize; 4], f64)>,
    /// Coefficients of sorted six-Majorana products (three-body part).
    pub sextic: Vec<([usize; 6], f64)>,
}

impl MajoranaHamiltonian {
    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn has_three_body(&self) -> bool {
        !self.sextic.is_empty()
    }

    pub fn is_quadratic(&self) -> bool {
        self.quartic.is_empty() && self.sextic.is_empty()
    }

    /// `V_pqrs` of the `g_p g_q g_s g_r` convention; zero unless the indices
    /// are distinct.
    pub fn v(&self, idx: [usize; 4]) -> f64 {
        let mut sorted = idx;
        let sign = sort_with_sign(&mut sorted);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return 0.0;
        }
        self.quartic
            .iter()
            .find(|(k, _)| *k == sorted)
            .map_or(0.0, |(_, c)| -sign * c / 24.0)
    }

    /// Dense `V` tensor, flattened `((p*n + q)*n + r)*n + s`.
    pub fn v_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut v = vec![0.0; n * n * n * n];
        for &(k, c) in &self.quartic {
            for_each_permutation(k, |perm, sign| {
                v[((perm[0] * n + perm[1]) * n + perm[2]) * n + perm[3]] = -sign * c / 24.0;
            });
        }
        v
    }
}

/// Sorts in place and returns the permutation sign.
pub(crate) fn sort_with_sign<const N: usize>(a: &mut [usize; N]) -> f64 {
    let mut sign = 1.0;
    for i in 0..N {
        for j in 0..N - 1 - i {
            if a[j] > a[j + 1] {
                a.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    sign
}

/// Calls `f(perm, sign)` for all 24 orderings of `k`.
pub(crate) fn for_each_permutation(k: [usize; 4], mut f: impl FnMut([usize; 4], f64)) {
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a == b || a == c || a == d || b == c || b == d || c == d {
                        continue;
                    }
                    let mut p = [a, b, c, d];
                    let sign = sort_with_sign(&mut p);
                    f([k[a], k[b], k[c], k[d]], sign);
                }
            }
        }
    }
}

pub fn operator_to_majorana(op: &FermionOperator) -> Result<MajoranaHamiltonian> {
    let exp = majorana_expansion(op)?;
    let m = op.modes;
    let mut h = MajoranaHamiltonian {
        modes: m,
        offset: 0.0,
        t: DMatrix::zeros(2 * m, 2 * m),
        quartic: Vec::new(),
        sextic: Vec::new(),
    };
    for (mono, c) in exp {
        let idx = indices(mono);
        match idx.len() {
            0 => {
                if c.im.abs() > 1e-10 {
                    return Err(Error::NotHermitian(c.im.abs()));
                }
                h.offset = c.re;
            }
            2 => {
                // i g_a g_b is Hermitian: c = 2 i T_ab
                if c.re.abs() > 1e-10 {
                    return Err(Error::NotHermitian(c.re.abs()));
                }
                let (a, b) = (idx[0], idx[1]);
                h.t[(a, b)] = c.im / 2.0;
                h.t[(b, a)] = -c.im / 2.0;
            }
            4 => {
                if c.im.abs() > 1e-10 {
                    return Err(Error::NotHermitian(c.im.abs()));
                }
                h.quartic.push(([idx[0], idx[1], idx[2], idx[3]], c.re));
            }
            6 => {
                // g_a..g_f with six distinct indices is anti-Hermitian
                if c.re.abs() > 1e-10 {
                    return Err(Error::NotHermitian(c.re.abs()));
                }
                h.sextic.push(([idx[0], idx[1], idx[2], idx[3], idx[4], idx[5]], c.im));
            }
            n if n % 2 == 1 => {
                return Err(Error::Unsupported("fermion-parity-odd terms".into()));
            }
            n => return Err(Error::Unsupported(format!("{n}-Majorana terms"))),
        }
    }
    Ok(h)
}

/// Rewrites a Hamiltonian in Majorana operators. A three-body part is kept
/// in [`MajoranaHamiltonian::sextic`]; downstream solvers refuse it.
pub fn to_majorana(spec: &HamiltonianSpec) -> Result<MajoranaHamiltonian> {
    spec.validate()?;
    let h = operator_to_majorana(&spec.to_operator())?;
    if h.has_three_body() {
        log::warn!("three-body terms carried into the Majorana form; the GHF solver does not support them");
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::LadderOp;

    #[test]
    fn sign_of_monomial_products() {
        // g1 g0 = -g0 g1
        assert_eq!(monomial_mul(0b10, 0b01), (-1.0, 0b11));
        assert_eq!(monomial_mul(0b01, 0b10), (1.0, 0b11));
        // g0 g1 g0 = -g1
        assert_eq!(monomial_mul(0b11, 0b01), (-1.0, 0b10));
        assert_eq!(monomial_mul(0b101, 0b101), (-1.0, 0));
    }

    #[test]
    fn single_number_operator() {
        let mut op = FermionOperator::new(1);
        op.push(vec![LadderOp::create(0), LadderOp::annihilate(0)], Complex64::new(1.0, 0.0));
        let h = operator_to_majorana(&op).unwrap();
        // n = (1 - i g^A g^B)/2
        assert!((h.offset - 0.5).abs() < 1e-15);
        assert!((h.t[(0, 1)] + 0.25).abs() < 1e-15);
        assert!((h.t[(1, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_spec_is_zero() {
        let h = to_majorana(&HamiltonianSpec::new(3)).unwrap();
        assert_eq!(h.offset, 0.0);
        assert_eq!(h.t.amax(), 0.0);
        assert!(h.quartic.is_empty());
    }

    #[test]
    fn three_body_is_carried() {
        let mut spec = HamiltonianSpec::new(3);
        spec.add_three_body([0, 1, 2, 0, 1, 2], Complex64::new(1.0, 0.0)).unwrap();
        let h = to_majorana(&spec).unwrap();
        assert!(h.has_three_body());
    }

    #[test]
    fn dense_v_is_antisymmetric() {
        let h = MajoranaHamiltonian {
            modes: 2,
            offset: 0.0,
            t: DMatrix::zeros(4, 4),
            quartic: vec![([0, 1, 2, 3], 0.7)],
            sextic: vec![],
        };
        let v = h.v_dense();
        let at = |p: usize, q: usize, r: usize, s: usize| v[((p * 4 + q) * 4 + r) * 4 + s];
        assert!((at(0, 1, 2, 3) + 0.7 / 24.0).abs() < 1e-15);
        assert!((at(1, 0, 2, 3) - 0.7 / 24.0).abs() < 1e-15);
        assert!((at(0, 2, 1, 3) - 0.7 / 24.0).abs() < 1e-15);
        assert_eq!(h.v([3, 2, 1, 0]), at(3, 2, 1, 0));
    }
}
