//! Occupation-number construction of fermionic operators.
//!
//! This path works on occupation bitstrings directly and never touches Pauli
//! algebra, so it serves as the reference the qubit encoding is checked
//! against. The basis ordering and phases follow [`crate::jw`]: basis index
//! `b` has qubit `p` at bit `M-1-p` and a set bit means an empty mode. The
//! sign of `a+_p` is the textbook `(-1)^(occupied modes below p)`; the
//! alternating phase of the qubit encoding cancels against its `Z` tail,
//! which counts empty modes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::{FermionOperator, Ladder, LadderOp};

#[inline]
fn bit(modes: usize, p: usize) -> usize {
    1usize << (modes - 1 - p)
}

#[inline]
pub fn occupied(modes: usize, b: usize, p: usize) -> bool {
    b & bit(modes, p) == 0
}

pub fn occupation_count(modes: usize, b: usize) -> usize {
    modes - b.count_ones() as usize
}

/// Basis index of the state with the given modes occupied.
pub fn basis_index(modes: usize, occupied_modes: &[usize]) -> usize {
    let mut b = (1usize << modes) - 1;
    for &p in occupied_modes {
        b &= !bit(modes, p);
    }
    b
}

/// Applies a monomial (rightmost operator first) to basis state `b`.
pub fn apply_monomial(modes: usize, ops: &[LadderOp], b: usize) -> Option<(usize, f64)> {
    let mut state = b;
    let mut sign = 1.0;
    for op in ops.iter().rev() {
        let p = op.mode;
        let occ = occupied(modes, state, p);
        match (op.kind, occ) {
            (Ladder::Create, true) | (Ladder::Annihilate, false) => return None,
            _ => {}
        }
        let below = (0..p).filter(|&q| occupied(modes, state, q)).count();
        if below % 2 == 1 {
            sign = -sign;
        }
        state ^= bit(modes, p);
    }
    Some((state, sign))
}

pub fn dense_matrix(op: &FermionOperator) -> DMatrix<Complex64> {
    let dim = 1usize << op.modes;
    let mut m = DMatrix::zeros(dim, dim);
    for t in &op.terms {
        for b in 0..dim {
            if let Some((b2, s)) = apply_monomial(op.modes, &t.ops, b) {
                m[(b2, b)] += t.coeff * s;
            }
        }
    }
    m
}

pub fn ladder_matrix(modes: usize, op: LadderOp) -> DMatrix<Complex64> {
    let mut f = FermionOperator::new(modes);
    f.push(vec![op], Complex64::new(1.0, 0.0));
    dense_matrix(&f)
}

/// Dense Majorana matrix `g_k`, `k in 0..2M`.
pub fn majorana_matrix(modes: usize, k: usize) -> DMatrix<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    if k < modes {
        ladder_matrix(modes, LadderOp::create(k)) + ladder_matrix(modes, LadderOp::annihilate(k))
    } else {
        let p = k - modes;
        (ladder_matrix(modes, LadderOp::create(p)) - ladder_matrix(modes, LadderOp::annihilate(p))) * (-i)
    }
}

/// Unitary `P` with `P a+_p P^+ = a+_perm[p]` and `P |vac> = |vac>`.
pub fn mode_permutation(modes: usize, perm: &[usize]) -> Result<DMatrix<Complex64>> {
    let mut seen = vec![false; modes];
    if perm.len() != modes || perm.iter().any(|&q| q >= modes || std::mem::replace(&mut seen[q], true)) {
        return Err(Error::invalid("not a permutation of the modes"));
    }
    let dim = 1usize << modes;
    let vac = basis_index(modes, &[]);
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        let occ: Vec<usize> = (0..modes).filter(|&p| occupied(modes, b, p)).collect();
        let from: Vec<LadderOp> = occ.iter().map(|&p| LadderOp::create(p)).collect();
        let to: Vec<LadderOp> = occ.iter().map(|&p| LadderOp::create(perm[p])).collect();
        let (_, s0) = apply_monomial(modes, &from, vac).expect("distinct modes");
        let (b2, s1) = apply_monomial(modes, &to, vac).expect("distinct modes");
        m[(b2, b)] = Complex64::new(s0 * s1, 0.0);
    }
    Ok(m)
}

/// Fock vacuum as an amplitude vector.
pub fn vacuum(modes: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(1 << modes);
    v[basis_index(modes, &[])] = Complex64::new(1.0, 0.0);
    v
}
