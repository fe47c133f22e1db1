//! Low-depth circuit ansatz: matchgate cycles with nearest-neighbour ZZ
//! rotations, between the X layer and `U_Bog^+`.

use serde::{Deserialize, Serialize};

use super::registry::Ansatz;
use super::{GhfReference, Objective, ObjectiveValue};
use crate::circuit::{Gate, GateKind, GateSequence};
use crate::error::{Error, Result};
use crate::matchgate::{block_pairs, cycles};
use crate::sim::Statevector;

/// Time order of the five rotations of one `K` gate.
pub const KGATE_ORDER: [GateKind; 5] =
    [GateKind::RyxMinus, GateKind::Rxy, GateKind::Rzz, GateKind::RyyMinus, GateKind::Rxx];

/// `5 L (M-1) ceil(M/2) + M`.
pub fn ldca_parameter_count(modes: usize, l: usize) -> usize {
    5 * l * modes.saturating_sub(1) * cycles(modes) + modes
}

/// Layers of X prep, the variational block and `U_Bog^+`. With
/// `measurement` the basis-rotation layer is counted as well, giving
/// `(10L + 8) ceil(M/2) + 4`.
pub fn ldca_depth(modes: usize, l: usize, measurement: bool) -> usize {
    (10 * l + 8) * cycles(modes) + 3 + measurement as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdcaParams {
    pub modes: usize,
    pub cycles: usize,
    pub theta_z: Vec<f64>,
    /// Flat over `(l, k, j, n)` with `n` following [`KGATE_ORDER`].
    pub theta: Vec<f64>,
}

impl LdcaParams {
    pub fn zeros(modes: usize, cycles: usize) -> Self {
        let n = ldca_parameter_count(modes, cycles) - modes;
        Self { modes, cycles, theta_z: vec![0.0; modes], theta: vec![0.0; n] }
    }

    pub fn count(&self) -> usize {
        self.theta_z.len() + self.theta.len()
    }

    pub fn check(&self) -> Result<()> {
        let want = ldca_parameter_count(self.modes, self.cycles);
        if self.theta_z.len() != self.modes || self.count() != want {
            return Err(Error::DimensionMismatch { expected: want, found: self.count() });
        }
        Ok(())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.theta_z.clone();
        v.extend_from_slice(&self.theta);
        v
    }

    pub fn from_vec(modes: usize, cycles: usize, v: &[f64]) -> Result<Self> {
        let want = ldca_parameter_count(modes, cycles);
        if v.len() != want {
            return Err(Error::DimensionMismatch { expected: want, found: v.len() });
        }
        Ok(Self { modes, cycles, theta_z: v[..modes].to_vec(), theta: v[modes..].to_vec() })
    }

    /// Index into [`Self::theta`].
    pub fn index(modes: usize, l: usize, k: usize, j: usize, n: usize) -> usize {
        (((l * cycles(modes)) + k) * (modes - 1) + j) * 5 + n
    }
}

/// A gate sequence whose rotation angles are bound from a parameter vector.
#[derive(Clone, Debug)]
pub(crate) struct ParamCircuit {
    pub seq: GateSequence,
    /// Parallel to `seq.layers`.
    pub params: Vec<Vec<Option<usize>>>,
}

impl ParamCircuit {
    pub fn new(qubits: usize) -> Self {
        Self { seq: GateSequence::new(qubits), params: Vec::new() }
    }

    pub fn push_fixed(&mut self, seq: &GateSequence) {
        for l in &seq.layers {
            self.params.push(vec![None; l.len()]);
            self.seq.layers.push(l.clone());
        }
    }

    pub fn push_layer(&mut self, layer: Vec<(Gate, Option<usize>)>) {
        let (g, p) = layer.into_iter().unzip();
        self.seq.layers.push(g);
        self.params.push(p);
    }

    pub fn bind(&self, x: &[f64]) -> GateSequence {
        let mut seq = self.seq.clone();
        for (layer, idx) in seq.layers.iter_mut().zip(&self.params) {
            for (g, p) in layer.iter_mut().zip(idx) {
                if let Some(p) = p {
                    g.theta = x[*p];
                }
            }
        }
        seq
    }

    /// Objective and its gradient by one forward and one backward sweep.
    pub fn value_and_gradient(
        &self,
        x: &[f64],
        psi0: &Statevector,
        obj: &Objective,
        grad: &mut [f64],
    ) -> Result<ObjectiveValue> {
        let seq = self.bind(x);
        let mut phi = psi0.clone();
        phi.apply_sequence(&seq)?;
        let (value, mut lambda) = obj.value_and_adjoint(&phi)?;
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (layer, idx) in seq.layers.iter().zip(&self.params).rev() {
            for (g, p) in layer.iter().zip(idx).rev() {
                if let Some(p) = p {
                    let (sign, pauli) = g.pauli();
                    grad[*p] += -2.0 * sign * lambda.pauli_overlap(&pauli, &phi)?.im;
                }
                let inv = g.inverse();
                phi.apply_gate(&inv)?;
                lambda.apply_gate(&inv)?;
            }
        }
        Ok(value)
    }
}

fn variational_block(modes: usize, l_cycles: usize, offset: usize, out: &mut ParamCircuit) {
    out.push_layer((0..modes).map(|q| (Gate::rz(q, 0.0), Some(offset + q))).collect());
    let base = offset + modes;
    for l in 0..l_cycles {
        for k in 0..cycles(modes) {
            for parity in [1, 0] {
                for (n, kind) in KGATE_ORDER.iter().enumerate() {
                    let layer = block_pairs(modes, parity)
                        .map(|j| (Gate::two(*kind, j, j + 1, 0.0), Some(base + LdcaParams::index(modes, l, k, j, n))))
                        .collect();
                    out.push_layer(layer);
                }
            }
        }
    }
}

/// The variational block alone: one RZ layer then `L` cycles, each of
/// `ceil(M/2)` even/odd `K` layers.
pub fn ldca_sequence(p: &LdcaParams) -> Result<GateSequence> {
    p.check()?;
    let mut c = ParamCircuit::new(p.modes);
    variational_block(p.modes, p.cycles, 0, &mut c);
    Ok(c.bind(&p.to_vec()))
}

/// X layer, variational block, then the inverse of the emitted `U_Bog`.
pub fn prepare_ldca(p: &LdcaParams, reference: &GhfReference) -> Result<Statevector> {
    if p.modes != reference.modes() {
        return Err(Error::DimensionMismatch { expected: reference.modes(), found: p.modes });
    }
    let mut s = reference.frame_vacuum();
    s.apply_sequence(&ldca_sequence(p)?)?;
    s.apply_sequence(&reference.unprepare())?;
    Ok(s)
}

/// LDCA with a fixed number of cycles; `L = 0` is the GHF state itself.
pub struct LdcaAnsatz {
    name: String,
    modes: usize,
    cycles: usize,
    circuit: ParamCircuit,
    psi0: Statevector,
}

impl LdcaAnsatz {
    pub fn new(reference: &GhfReference, cycles: usize) -> Self {
        let m = reference.modes();
        let mut circuit = ParamCircuit::new(m);
        variational_block(m, cycles, 0, &mut circuit);
        circuit.push_fixed(&reference.unprepare());
        let name = if cycles == 0 { "ghf".to_string() } else { format!("ldca-{cycles}") };
        Self { name, modes: m, cycles, circuit, psi0: reference.frame_vacuum() }
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }
}

impl Ansatz for LdcaAnsatz {
    fn name(&self) -> &str {
        &self.name
    }

    fn family(&self) -> &str {
        "ldca"
    }

    fn num_params(&self) -> usize {
        ldca_parameter_count(self.modes, self.cycles)
    }

    fn prepare(&self, x: &[f64]) -> Result<Statevector> {
        self.check_len(x)?;
        let mut s = self.psi0.clone();
        s.apply_sequence(&self.circuit.bind(x))?;
        Ok(s)
    }

    fn value_and_gradient(&self, x: &[f64], obj: &Objective, grad: &mut [f64]) -> Result<ObjectiveValue> {
        self.check_len(x)?;
        self.circuit.value_and_gradient(x, &self.psi0, obj, grad)
    }

    fn circuit(&self, x: &[f64]) -> Option<GateSequence> {
        let mut seq = GateSequence::new(self.modes);
        let prep: Vec<Gate> = self
            .psi0
            .amplitudes()
            .iter()
            .position(|a| a.norm() > 0.5)
            .map(|b| (0..self.modes).filter(|q| b >> (self.modes - 1 - q) & 1 == 1).map(Gate::x).collect())
            .unwrap_or_default();
        seq.push_layer(prep);
        seq.extend(&self.circuit.bind(x));
        Some(seq)
    }
}
