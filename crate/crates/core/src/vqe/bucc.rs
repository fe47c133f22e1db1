//! Bogoliubov unitary coupled cluster, `exp(i (T + T^+))` on the
//! quasiparticle vacuum, by exact exponentiation.
//!
//! Quasiparticles are taken in the circuit frame of the reference: there
//! the vacuum is the X-layer state and `b_j = a_j`, except that the last
//! mode of an odd-parity reference has `b_j = a+_j`. The state is rotated
//! back with the compiled `U_Bog^+`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::registry::Ansatz;
use super::{GhfReference, Objective, ObjectiveValue};
use crate::circuit::GateSequence;
use crate::error::{Error, Result};
use crate::fermion::{FermionOperator, LadderOp};
use crate::jw::operator_to_qubits;
use crate::linalg::hermitian_eigen;
use crate::sim::Statevector;

const MAX_MODES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuccOrder {
    S,
    SD,
}

fn pairs(m: usize) -> Vec<[usize; 2]> {
    let mut v = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            v.push([a, b]);
        }
    }
    v
}

fn quads(m: usize) -> Vec<[usize; 4]> {
    let mut v = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                for d in c + 1..m {
                    v.push([a, b, c, d]);
                }
            }
        }
    }
    v
}

/// Real parameter count: real and imaginary parts of every amplitude.
pub fn bucc_generator_count(modes: usize, order: BuccOrder) -> usize {
    let s = pairs(modes).len();
    let d = if order == BuccOrder::SD { quads(modes).len() } else { 0 };
    2 * (s + d)
}

/// Amplitudes stored on ordered index tuples, so antisymmetry holds by
/// construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuccParams {
    pub modes: usize,
    /// On `k1 < k2`, lexicographic.
    pub singles: Vec<Complex64>,
    /// On `k1 < k2 < k3 < k4`, lexicographic; empty for singles only.
    pub doubles: Vec<Complex64>,
}

impl BuccParams {
    pub fn zeros(modes: usize, order: BuccOrder) -> Self {
        let d = if order == BuccOrder::SD { quads(modes).len() } else { 0 };
        Self { modes, singles: vec![Complex64::default(); pairs(modes).len()], doubles: vec![Complex64::default(); d] }
    }

    pub fn order(&self) -> BuccOrder {
        if self.doubles.is_empty() {
            BuccOrder::S
        } else {
            BuccOrder::SD
        }
    }

    /// `theta_{k1 k2}` for any index order.
    pub fn single(&self, k1: usize, k2: usize) -> Complex64 {
        if k1 == k2 {
            return Complex64::default();
        }
        let (a, b, s) = if k1 < k2 { (k1, k2, 1.0) } else { (k2, k1, -1.0) };
        let idx = pairs(self.modes).iter().position(|p| *p == [a, b]).expect("valid indices");
        self.singles[idx] * s
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.singles.iter().chain(&self.doubles).flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn from_vec(modes: usize, order: BuccOrder, v: &[f64]) -> Result<Self> {
        let want = bucc_generator_count(modes, order);
        if v.len() != want {
            return Err(Error::DimensionMismatch { expected: want, found: v.len() });
        }
        let z: Vec<Complex64> = v.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let s = pairs(modes).len();
        Ok(Self { modes, singles: z[..s].to_vec(), doubles: z[s..].to_vec() })
    }
}

/// Hermitian generator restricted to the reference parity sector, as
/// `(row, col, value)` triplets.
type Sparse = Vec<(usize, usize, Complex64)>;

pub struct BuccAnsatz {
    name: String,
    modes: usize,
    order: BuccOrder,
    sector: Vec<usize>,
    vacuum: usize,
    generators: Vec<Sparse>,
    unprepare: GateSequence,
}

impl BuccAnsatz {
    pub fn new(reference: &GhfReference, order: BuccOrder) -> Result<Self> {
        let m = reference.modes();
        if m > MAX_MODES {
            return Err(Error::Unsupported(format!("exact BUCC is limited to {MAX_MODES} modes")));
        }
        let psi0 = reference.frame_vacuum();
        let vac_full = psi0.amplitudes().iter().position(|a| a.norm() > 0.5).expect("basis state");
        let parity = vac_full.count_ones() % 2;
        let sector: Vec<usize> = (0..1usize << m).filter(|b| b.count_ones() % 2 == parity).collect();
        let mut index = vec![usize::MAX; 1 << m];
        for (i, &b) in sector.iter().enumerate() {
            index[b] = i;
        }
        let flipped = |k: usize| reference.target.odd_parity && k == m - 1;
        let create = |k: usize| if flipped(k) { LadderOp::annihilate(k) } else { LadderOp::create(k) };
        let mut clusters: Vec<Vec<usize>> = pairs(m).into_iter().map(|p| p.to_vec()).collect();
        if order == BuccOrder::SD {
            clusters.extend(quads(m).into_iter().map(|q| q.to_vec()));
        }
        let mut generators = Vec::with_capacity(2 * clusters.len());
        for c in clusters {
            let mut op = FermionOperator::new(m);
            op.push(c.iter().map(|&k| create(k)).collect(), Complex64::new(1.0, 0.0));
            let o = operator_to_qubits(&op)?;
            let od = o.adjoint();
            let mut re = o.clone();
            re.add_assign_op(&od);
            let mut im = o;
            im.add_assign_op(&od.scaled(Complex64::new(-1.0, 0.0)));
            im.scale(Complex64::new(0.0, 1.0));
            for g in [re, im] {
                let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
                for (x, z, coeff) in g.compile().masks() {
                    for (j, &b) in sector.iter().enumerate() {
                        let sign = if (z & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                        *acc.entry((index[b ^ x], j)).or_default() += coeff * sign;
                    }
                }
                generators.push(acc.into_iter().filter(|(_, v)| v.norm() > 1e-14).map(|((i, j), v)| (i, j, v)).collect());
            }
        }
        let name = match order {
            BuccOrder::S => "bucc-s",
            BuccOrder::SD => "buccsd",
        };
        Ok(Self {
            name: name.into(),
            modes: m,
            order,
            vacuum: index[vac_full],
            sector,
            generators,
            unprepare: reference.unprepare(),
        })
    }

    pub fn order(&self) -> BuccOrder {
        self.order
    }

    fn generator(&self, x: &[f64]) -> DMatrix<Complex64> {
        let d = self.sector.len();
        let mut g = DMatrix::zeros(d, d);
        for (xk, a) in x.iter().zip(&self.generators) {
            if *xk != 0.0 {
                for &(i, j, v) in a {
                    g[(i, j)] += v * *xk;
                }
            }
        }
        g
    }

    fn embed(&self, v: &DVector<Complex64>) -> Statevector {
        let mut amps = vec![Complex64::default(); 1 << self.modes];
        for (i, &b) in self.sector.iter().enumerate() {
            amps[b] = v[i];
        }
        Statevector::from_raw(amps)
    }

    /// Frame state `exp(iG)|vac>` with the eigendecomposition of `G`.
    fn frame_state(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<Complex64>, DVector<Complex64>)> {
        let (lambda, v) = hermitian_eigen(&self.generator(x))?;
        let y: DVector<Complex64> = v.row(self.vacuum).adjoint();
        let phases = DVector::from_iterator(lambda.len(), lambda.iter().map(|l| Complex64::from_polar(1.0, *l)));
        let psi = &v * y.component_mul(&phases);
        Ok((lambda, v, psi))
    }
}

impl Ansatz for BuccAnsatz {
    fn name(&self) -> &str {
        &self.name
    }

    fn family(&self) -> &str {
        "bucc"
    }

    fn num_params(&self) -> usize {
        self.generators.len()
    }

    fn prepare(&self, x: &[f64]) -> Result<Statevector> {
        self.check_len(x)?;
        let (_, _, psi) = self.frame_state(x)?;
        let mut s = self.embed(&psi);
        s.apply_sequence(&self.unprepare)?;
        Ok(s)
    }

    fn value_and_gradient(&self, x: &[f64], obj: &Objective, grad: &mut [f64]) -> Result<ObjectiveValue> {
        self.check_len(x)?;
        let (lambda, v, psi1) = self.frame_state(x)?;
        let mut psi = self.embed(&psi1);
        psi.apply_sequence(&self.unprepare)?;
        let (value, mut adj) = obj.value_and_adjoint(&psi)?;
        adj.apply_sequence(&self.unprepare.inverse())?;
        let h1 = DVector::from_iterator(self.sector.len(), self.sector.iter().map(|&b| adj.amplitudes()[b]));
        // dE_k = 2 Re sum_ij Z_ij (i A_k)_ij with Z = conj(V) K V^T and
        // K_ab = conj(x_a) Phi_ab y_b, x = V^+ O psi1, y = V^+ e_vac.
        let xa = v.adjoint() * h1;
        let y: DVector<Complex64> = v.row(self.vacuum).adjoint();
        let d = lambda.len();
        let k = DMatrix::from_fn(d, d, |a, b| {
            let mean = 0.5 * (lambda[a] + lambda[b]);
            let half = 0.5 * (lambda[a] - lambda[b]);
            let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
            xa[a].conj() * Complex64::from_polar(sinc, mean) * y[b]
        });
        let z = v.conjugate() * k * v.transpose();
        let i = Complex64::new(0.0, 1.0);
        for (g, a) in grad.iter_mut().zip(&self.generators) {
            let s: Complex64 = a.iter().map(|&(r, c, val)| z[(r, c)] * val).sum();
            *g = 2.0 * (i * s).re;
        }
        Ok(value)
    }
}

/// `U_Bog^+ exp(i (T + T^+)) |vac>` for explicit amplitudes.
pub fn bucc_state(p: &BuccParams, reference: &GhfReference) -> Result<Statevector> {
    if p.modes != reference.modes() {
        return Err(Error::DimensionMismatch { expected: reference.modes(), found: p.modes });
    }
    let order = p.order();
    if order == BuccOrder::SD && p.doubles.len() != quads(p.modes).len() {
        return Err(Error::invalid("doubles must cover every k1 < k2 < k3 < k4"));
    }
    BuccAnsatz::new(reference, order)?.prepare(&p.to_vec())
}
