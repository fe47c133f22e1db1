//! Gate sequences and their JSON form.
//!
//! | kind        | unitary                   |
//! |-------------|---------------------------|
//! | `rz`        | `exp(+i t Z_q)`           |
//! | `rxx`       | `exp(+i t X_i X_j)`       |
//! | `ryy_minus` | `exp(-i t Y_i Y_j)`       |
//! | `rxy`       | `exp(+i t X_i Y_j)`       |
//! | `ryx_minus` | `exp(-i t Y_i X_j)`       |
//! | `rzz`       | `exp(+i t Z_i Z_j)`       |
//! | `x`         | `X_q`                     |

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Rz,
    Rxx,
    RyyMinus,
    Rxy,
    RyxMinus,
    Rzz,
    X,
}

impl GateKind {
    pub const ALL: [GateKind; 7] =
        [GateKind::Rz, GateKind::Rxx, GateKind::RyyMinus, GateKind::Rxy, GateKind::RyxMinus, GateKind::Rzz, GateKind::X];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Rz | GateKind::X => 1,
            _ => 2,
        }
    }

    pub fn is_rotation(self) -> bool {
        self != GateKind::X
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rz => "rz",
            GateKind::Rxx => "rxx",
            GateKind::RyyMinus => "ryy_minus",
            GateKind::Rxy => "rxy",
            GateKind::RyxMinus => "ryx_minus",
            GateKind::Rzz => "rzz",
            GateKind::X => "x",
        }
    }

    /// Exponent sign `s` and axes with `gate = exp(i s t P)`.
    pub fn generator(self) -> (f64, &'static [Axis]) {
        match self {
            GateKind::Rz => (1.0, &[Axis::Z]),
            GateKind::Rxx => (1.0, &[Axis::X, Axis::X]),
            GateKind::RyyMinus => (-1.0, &[Axis::Y, Axis::Y]),
            GateKind::Rxy => (1.0, &[Axis::X, Axis::Y]),
            GateKind::RyxMinus => (-1.0, &[Axis::Y, Axis::X]),
            GateKind::Rzz => (1.0, &[Axis::Z, Axis::Z]),
            GateKind::X => (1.0, &[Axis::X]),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    #[serde(rename = "q")]
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub theta: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], theta: f64) -> Self {
        Self { kind, qubits: qubits.to_vec(), theta }
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, &[q], 0.0)
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Rz, &[q], theta)
    }

    pub fn two(kind: GateKind, i: usize, j: usize, theta: f64) -> Self {
        Self::new(kind, &[i, j], theta)
    }

    /// Pauli string `P` and sign `s` with `gate = exp(i s theta P)`; for `x`
    /// the gate is `P` itself.
    pub fn pauli(&self) -> (f64, PauliString) {
        let (sign, axes) = self.kind.generator();
        let word: Vec<(usize, Axis)> = self.qubits.iter().copied().zip(axes.iter().copied()).collect();
        (sign, PauliString::from_word(&word))
    }

    pub fn inverse(&self) -> Self {
        let theta = if self.kind.is_rotation() { -self.theta } else { 0.0 };
        Self { kind: self.kind, qubits: self.qubits.clone(), theta }
    }

    fn validate(&self, qubits: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::invalid(format!("{} takes {} qubit(s)", self.kind, self.kind.arity())));
        }
        for &q in &self.qubits {
            if q >= qubits {
                return Err(Error::IndexOutOfRange { index: q, len: qubits });
            }
        }
        if self.kind.arity() == 2 {
            let (i, j) = (self.qubits[0], self.qubits[1]);
            if i.abs_diff(j) != 1 {
                return Err(Error::invalid(format!("{} on non-neighbouring qubits {i},{j}", self.kind)));
            }
        }
        if !self.theta.is_finite() {
            return Err(Error::invalid("non-finite gate angle"));
        }
        Ok(())
    }
}

/// Layers of gates on disjoint qubits; empty layers are kept because they
/// count toward the structural depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSequence {
    pub qubits: usize,
    pub layers: Vec<Vec<Gate>>,
}

impl GateSequence {
    pub fn new(qubits: usize) -> Self {
        Self { qubits, layers: Vec::new() }
    }

    pub fn push_layer(&mut self, layer: Vec<Gate>) {
        self.layers.push(layer);
    }

    /// All-X layer taking `|0..0>` to `|1..1>`.
    pub fn x_layer(qubits: usize, skip: &[usize]) -> Vec<Gate> {
        (0..qubits).filter(|q| !skip.contains(q)).map(Gate::x).collect()
    }

    pub fn extend(&mut self, other: &GateSequence) {
        self.layers.extend(other.layers.iter().cloned());
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    pub fn gates_mut(&mut self) -> impl Iterator<Item = &mut Gate> {
        self.layers.iter_mut().flatten()
    }

    pub fn gate_count(&self) -> usize {
        self.gates().count()
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates().filter(|g| g.kind == kind).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates().filter(|g| g.kind.arity() == 2).count()
    }

    /// Circuit for the inverse unitary.
    pub fn inverse(&self) -> Self {
        let layers = self
            .layers
            .iter()
            .rev()
            .map(|l| l.iter().rev().map(Gate::inverse).collect())
            .collect();
        Self { qubits: self.qubits, layers }
    }

    pub fn validate(&self) -> Result<()> {
        for layer in &self.layers {
            let mut used = 0u128;
            for g in layer {
                g.validate(self.qubits)?;
                for &q in &g.qubits {
                    if q >= 128 || used >> q & 1 == 1 {
                        return Err(Error::invalid(format!("qubit {q} used twice in one layer")));
                    }
                    used |= 1 << q;
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let seq: GateSequence = serde_json::from_str(s)?;
        seq.validate()?;
        Ok(seq)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
