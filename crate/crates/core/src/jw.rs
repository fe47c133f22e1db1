//! Jordan-Wigner encoding.
//!
//! Mode `p` (0-based) maps to qubit `p` with the alternating phase
//!
//! ```text
//! a+_p = (-1)^p Z_0 ... Z_{p-1} s+_p,   s+ = |0><1| = (X + iY)/2
//! ```
//!
//! so a qubit in `|0>` holds an occupied mode and `|1...1>` is the Fock
//! vacuum, and `n_p = (1 + Z_p)/2`. The Majorana operators
//! `g_p = a+_p + a_p` and `g_{p+M} = -i(a+_p - a_p)` become
//! `(-1)^p Z..Z X_p` and `(-1)^p Z..Z Y_p`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::{FermionOperator, FermionTerm, HamiltonianSpec, Ladder, LadderOp};
use crate::pauli::{Axis, PauliString, QubitOperator};

fn string_phase(mode: usize) -> f64 {
    if mode % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn parity_tail(mode: usize) -> PauliString {
    PauliString { x: 0, z: (1u64 << mode) - 1 }
}

/// Image of a single ladder operator.
pub fn ladder_qubit(op: LadderOp, modes: usize) -> Result<QubitOperator> {
    if op.mode >= modes {
        return Err(Error::IndexOutOfRange { index: op.mode, len: modes });
    }
    let s = string_phase(op.mode);
    let tail = parity_tail(op.mode);
    let (_, x) = tail.mul(&PauliString::single(op.mode, Axis::X));
    let (_, y) = tail.mul(&PauliString::single(op.mode, Axis::Y));
    let half = 0.5 * s;
    let ysign = match op.kind {
        Ladder::Create => 1.0,
        Ladder::Annihilate => -1.0,
    };
    let mut q = QubitOperator::zero(modes);
    q.add_term(x, Complex64::new(half, 0.0));
    q.add_term(y, Complex64::new(0.0, half * ysign));
    Ok(q)
}

/// Image of Majorana operator `k` in `0..2M` (`k < M` is the A type).
pub fn majorana_qubit(k: usize, modes: usize) -> Result<QubitOperator> {
    if k >= 2 * modes {
        return Err(Error::IndexOutOfRange { index: k, len: 2 * modes });
    }
    let (mode, axis) = if k < modes { (k, Axis::X) } else { (k - modes, Axis::Y) };
    let (_, p) = parity_tail(mode).mul(&PauliString::single(mode, axis));
    Ok(QubitOperator::term(modes, p, Complex64::new(string_phase(mode), 0.0)))
}

/// Maps a fermionic monomial to a simplified Pauli sum.
pub fn jordan_wigner(term: &FermionTerm, modes: usize) -> Result<QubitOperator> {
    let mut acc = QubitOperator::identity(modes);
    for op in &term.ops {
        acc = acc.mul(&ladder_qubit(*op, modes)?);
    }
    acc.scale(term.coeff);
    Ok(acc)
}

pub fn operator_to_qubits(op: &FermionOperator) -> Result<QubitOperator> {
    op.validate()?;
    let mut out = QubitOperator::zero(op.modes);
    for t in &op.terms {
        out.add_assign_op(&jordan_wigner(t, op.modes)?);
    }
    Ok(out)
}

pub fn hamiltonian_to_qubits(spec: &HamiltonianSpec) -> Result<QubitOperator> {
    operator_to_qubits(&spec.to_operator())
}

/// `N = sum_p n_p`.
pub fn number_operator(modes: usize) -> QubitOperator {
    operator_to_qubits(&FermionOperator::number(modes)).expect("number operator is well formed")
}
