//! Layered decomposition of SO(2M) mode rotations into nearest-neighbour
//! matchgates.
//!
//! A gate `U` realizes `R` when `U g_j U^+ = sum_k R_kj g_k`. Circuits
//! compose as `R = R_n ... R_1` with `R_1` the first gate in time. Each
//! parameter drives one factor `exp(2 theta h)`, `h = e_a e_b^T - e_b e_a^T`
//! in Majorana coordinates (`a`, `b` from `{A_j, B_j}` with `B_j = j + M`).
//!
//! Layout in time order: one layer of local `(A_j, B_j)` phases, then
//! `ceil(M/2)` cycles, each an even-pair block (pairs `(1,2), (3,4), ...` in
//! 0-based qubits) followed by an odd-pair block (`(0,1), (2,3), ...`). A
//! block is four layers: `AA`, `BB`, `AB`, `BA`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateKind, GateSequence};
use crate::error::{Error, Result};
use crate::ghf::BogoliubovTransform;
use crate::optim::{minimize, BfgsOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    AA,
    BB,
    AB,
    BA,
}

impl Block {
    /// Time order within one nearest-neighbour matchgate.
    pub const ORDER: [Block; 4] = [Block::AA, Block::BB, Block::AB, Block::BA];

    fn index(self) -> usize {
        match self {
            Block::AA => 0,
            Block::BB => 1,
            Block::AB => 2,
            Block::BA => 3,
        }
    }

    /// Majorana plane `(a, b)` for the pair `(j, j+1)`.
    pub fn plane(self, j: usize, modes: usize) -> (usize, usize) {
        match self {
            Block::AA => (j, j + 1),
            Block::BB => (j + modes, j + 1 + modes),
            Block::AB => (j, j + 1 + modes),
            Block::BA => (j + modes, j + 1),
        }
    }

    /// Gate realizing `exp(2 theta h)` on qubits `(j, j+1)`.
    pub fn gate(self, j: usize, theta: f64) -> Gate {
        let kind = match self {
            Block::AA => GateKind::RyxMinus,
            Block::BB => GateKind::Rxy,
            Block::AB => GateKind::RyyMinus,
            Block::BA => GateKind::Rxx,
        };
        Gate::two(kind, j, j + 1, -theta)
    }
}

/// Orthogonal `2M x 2M` matrix with unit determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalTransform {
    r: DMatrix<f64>,
}

impl OrthogonalTransform {
    pub fn new(r: DMatrix<f64>) -> Result<Self> {
        let n = r.nrows();
        if r.ncols() != n || n % 2 == 1 {
            return Err(Error::invalid("rotation must be 2M x 2M"));
        }
        let orth = (r.transpose() * &r - DMatrix::identity(n, n)).amax();
        if orth > 1e-10 {
            return Err(Error::invalid(format!("matrix is not orthogonal ({orth:.2e})")));
        }
        let det = r.determinant();
        if det < 0.0 {
            return Err(Error::invalid("rotation has determinant -1"));
        }
        Ok(Self { r })
    }

    pub fn identity(modes: usize) -> Self {
        Self { r: DMatrix::identity(2 * modes, 2 * modes) }
    }

    pub fn modes(&self) -> usize {
        self.r.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// Overlap `tr(R_t^T R) / 2M`; one exactly when equal.
    pub fn overlap(&self, other: &DMatrix<f64>) -> f64 {
        self.r.component_mul(other).sum() / self.r.nrows() as f64
    }
}

/// Circuit target of a Bogoliubov transform. When the transform has
/// determinant `-1` (odd quasiparticle vacuum) the B-type Majorana of the
/// last mode is flipped, `R_c = D R`, and `odd_parity` is set: the circuit
/// then has to start from the vacuum with the last mode occupied.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitTarget {
    pub rotation: OrthogonalTransform,
    pub odd_parity: bool,
}

pub fn bog_to_orthogonal(bt: &BogoliubovTransform) -> Result<CircuitTarget> {
    let err = bt.unitarity_error();
    if err > 1e-10 {
        return Err(Error::invalid(format!("Bogoliubov transform is not unitary ({err:.2e})")));
    }
    let mut r = bt.to_orthogonal();
    let n = r.nrows();
    let odd = n > 0 && r.determinant() < 0.0;
    if odd {
        r.row_mut(n - 1).neg_mut();
    }
    Ok(CircuitTarget { rotation: OrthogonalTransform::new(r)?, odd_parity: odd })
}

/// One factor of the layered product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Factor {
    pub a: usize,
    pub b: usize,
    /// Index into the flat angle vector.
    pub param: usize,
    /// Circuit layer the gate lands in, counting the local layer as 0.
    pub layer: usize,
    pub kind: FactorKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FactorKind {
    Local { j: usize },
    Pair { j: usize, block: Block },
}

/// Angles `theta^{AB}_{jj}` and `theta^{mu nu (k)}_{j,j+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BogAngleSet {
    pub modes: usize,
    pub local: Vec<f64>,
    /// `layers[k][j]` holds `[AA, BB, AB, BA]` of pair `(j, j+1)` in cycle `k`.
    pub layers: Vec<Vec<[f64; 4]>>,
    /// Only local, `AB` and `BA` angles are used and the `AA`/`BB` layers
    /// are omitted from the circuit.
    #[serde(default)]
    pub number_conserving: bool,
}

pub fn cycles(modes: usize) -> usize {
    modes.div_ceil(2)
}

/// `M + 4 (M-1) ceil(M/2)`, which is `2M^2 - M` for even `M`.
pub fn angle_count(modes: usize) -> usize {
    modes + 4 * modes.saturating_sub(1) * cycles(modes)
}

/// `8 ceil(M/2) + 1`.
pub fn ubog_depth(modes: usize) -> usize {
    8 * cycles(modes) + 1
}

/// Pairs of an even (`parity = 1`) or odd (`parity = 0`) block.
pub fn block_pairs(modes: usize, parity: usize) -> impl Iterator<Item = usize> {
    (parity..modes.saturating_sub(1)).step_by(2)
}

/// All factors in time order.
pub fn factors(modes: usize, number_conserving: bool) -> Vec<Factor> {
    let mut out = Vec::with_capacity(angle_count(modes));
    for j in 0..modes {
        out.push(Factor { a: j, b: j + modes, param: j, layer: 0, kind: FactorKind::Local { j } });
    }
    let mut layer = 1;
    for k in 0..cycles(modes) {
        for parity in [1, 0] {
            for block in Block::ORDER {
                if number_conserving && matches!(block, Block::AA | Block::BB) {
                    continue;
                }
                for j in block_pairs(modes, parity) {
                    let (a, b) = block.plane(j, modes);
                    let param = modes + 4 * (k * (modes - 1) + j) + block.index();
                    out.push(Factor { a, b, param, layer, kind: FactorKind::Pair { j, block } });
                }
                layer += 1;
            }
        }
    }
    out
}

impl BogAngleSet {
    pub fn zeros(modes: usize) -> Self {
        Self {
            modes,
            local: vec![0.0; modes],
            layers: vec![vec![[0.0; 4]; modes.saturating_sub(1)]; cycles(modes)],
            number_conserving: false,
        }
    }

    pub fn count(&self) -> usize {
        angle_count(self.modes)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.local.clone();
        for cyc in &self.layers {
            for p in cyc {
                v.extend_from_slice(p);
            }
        }
        v
    }

    pub fn from_vec(modes: usize, v: &[f64]) -> Result<Self> {
        if v.len() != angle_count(modes) {
            return Err(Error::DimensionMismatch { expected: angle_count(modes), found: v.len() });
        }
        let mut s = Self::zeros(modes);
        s.local.copy_from_slice(&v[..modes]);
        let mut it = v[modes..].chunks_exact(4);
        for cyc in s.layers.iter_mut() {
            for p in cyc.iter_mut() {
                p.copy_from_slice(it.next().expect("length checked"));
            }
        }
        Ok(s)
    }

    pub fn random<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Self {
        let v: Vec<f64> = (0..angle_count(modes)).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        Self::from_vec(modes, &v).expect("length matches")
    }
}

/// `M <- exp(phi h) M` for the plane `(a, b)`.
fn rotate_rows(m: &mut DMatrix<f64>, a: usize, b: usize, phi: f64) {
    let (s, c) = phi.sin_cos();
    for col in 0..m.ncols() {
        let (x, y) = (m[(a, col)], m[(b, col)]);
        m[(a, col)] = c * x + s * y;
        m[(b, col)] = -s * x + c * y;
    }
}

/// `M <- M exp(phi h)` for the plane `(a, b)`.
fn rotate_cols(m: &mut DMatrix<f64>, a: usize, b: usize, phi: f64) {
    let (s, c) = phi.sin_cos();
    for row in 0..m.nrows() {
        let (x, y) = (m[(row, a)], m[(row, b)]);
        m[(row, a)] = c * x - s * y;
        m[(row, b)] = s * x + c * y;
    }
}

fn product(modes: usize, fs: &[Factor], theta: &[f64]) -> DMatrix<f64> {
    let mut r = DMatrix::identity(2 * modes, 2 * modes);
    for f in fs {
        rotate_rows(&mut r, f.a, f.b, 2.0 * theta[f.param]);
    }
    r
}

/// `R(theta)`, the product of all factors with the first in time rightmost.
pub fn reconstruct(angles: &BogAngleSet) -> OrthogonalTransform {
    let fs = factors(angles.modes, angles.number_conserving);
    OrthogonalTransform { r: product(angles.modes, &fs, &angles.to_vec()) }
}

/// `Phi = tr(R_t^T R(theta)) / 2M` and its gradient over the flat angles.
pub fn overlap_and_gradient(target: &DMatrix<f64>, fs: &[Factor], theta: &[f64], grad: &mut [f64]) -> f64 {
    let n = target.nrows();
    let norm = n as f64;
    let mut prefix = Vec::with_capacity(fs.len());
    let mut p = DMatrix::identity(n, n);
    for f in fs {
        rotate_rows(&mut p, f.a, f.b, 2.0 * theta[f.param]);
        prefix.push(p.clone());
    }
    let phi = target.component_mul(&p).sum() / norm;
    grad.iter_mut().for_each(|g| *g = 0.0);
    // b = R_t^T F_n ... F_{i+1}
    let mut b = target.transpose();
    for (i, f) in fs.iter().enumerate().rev() {
        let pi = &prefix[i];
        let (x, y) = (f.a, f.b);
        let pb_yx: f64 = pi.row(y).transpose().dot(&b.column(x));
        let pb_xy: f64 = pi.row(x).transpose().dot(&b.column(y));
        grad[f.param] += 2.0 * (pb_yx - pb_xy) / norm;
        rotate_cols(&mut b, f.a, f.b, 2.0 * theta[f.param]);
    }
    phi
}

/// Gauss-Newton refinement of `R(theta) - R_t` in least squares. The
/// overlap is flat to second order at the optimum, so quasi-Newton on `Phi`
/// alone stalls near `sqrt(eps)` in the angles.
pub fn polish(target: &DMatrix<f64>, fs: &[Factor], theta: &mut [f64], iters: usize) -> f64 {
    let n = target.nrows();
    let residual = |th: &[f64]| {
        let mut r = DMatrix::identity(n, n);
        for f in fs {
            rotate_rows(&mut r, f.a, f.b, 2.0 * th[f.param]);
        }
        r - target
    };
    let mut res = residual(theta);
    let mut err = res.norm();
    for _ in 0..iters {
        if err < 1e-14 {
            break;
        }
        let mut prefix = Vec::with_capacity(fs.len());
        let mut p = DMatrix::identity(n, n);
        for f in fs {
            rotate_rows(&mut p, f.a, f.b, 2.0 * theta[f.param]);
            prefix.push(p.clone());
        }
        let mut jac = DMatrix::<f64>::zeros(n * n, theta.len());
        let mut suffix = DMatrix::<f64>::identity(n, n);
        for (i, f) in fs.iter().enumerate().rev() {
            // d/dtheta F_i P_{i-1} = 2 h F_i P_{i-1} = 2 h P_i
            let pi = &prefix[i];
            let mut hp = DMatrix::<f64>::zeros(n, n);
            hp.row_mut(f.a).copy_from(&(pi.row(f.b) * 2.0));
            hp.row_mut(f.b).copy_from(&(pi.row(f.a) * -2.0));
            let d: DMatrix<f64> = &suffix * hp;
            for (k, v) in d.iter().enumerate() {
                jac[(k, f.param)] += v;
            }
            rotate_cols(&mut suffix, f.a, f.b, 2.0 * theta[f.param]);
        }
        let rhs = nalgebra::DVector::from_column_slice(res.as_slice());
        let svd = jac.svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max();
        let Ok(step) = svd.solve(&rhs, cutoff) else { break };
        let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, d)| t - d).collect();
        let r2 = residual(&trial);
        let e2 = r2.norm();
        if e2 >= err {
            break;
        }
        theta.copy_from_slice(&trial);
        res = r2;
        err = e2;
    }
    err
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecomposeConfig {
    /// Accept `Phi >= 1 - tol`.
    pub tol: f64,
    /// Below `1 - warn_tol` the decomposition fails.
    pub warn_tol: f64,
    pub random_starts: usize,
    pub seed: u64,
    /// Try the number-conserving layout first when the target commutes
    /// with the particle-number structure.
    pub number_conserving_fast_path: bool,
    pub max_iters: usize,
    /// Extra attempts on a randomly re-gauged quasiparticle basis when the
    /// first target fails; used by the GHF reference compiler.
    pub gauge_retries: usize,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self { tol: 1e-10, warn_tol: 1e-8, random_starts: 16, seed: 0, number_conserving_fast_path: false, max_iters: 2000, gauge_retries: 4 }
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub angles: BogAngleSet,
    pub overlap: f64,
    /// 0 is the zero start.
    pub start: usize,
}

/// True when `R` is block-structured as a number-conserving rotation,
/// `[[X, Y], [-Y, X]]`.
pub fn is_number_conserving(r: &DMatrix<f64>) -> bool {
    let m = r.nrows() / 2;
    let x1 = r.view((0, 0), (m, m));
    let x2 = r.view((m, m), (m, m));
    let y1 = r.view((0, m), (m, m));
    let y2 = r.view((m, 0), (m, m));
    (x1 - x2).amax() < 1e-12 && (y1 + y2).amax() < 1e-12
}

const START_CHUNK: usize = 4;
const EXACT_GAP: f64 = 1e-14;

fn run_starts(target: &DMatrix<f64>, modes: usize, nc: bool, cfg: &DecomposeConfig) -> Decomposition {
    let fs = factors(modes, nc);
    let count = angle_count(modes);
    let opts = BfgsOptions {
        max_iters: cfg.max_iters,
        grad_tol: 1e-10,
        f_target: 1e-12,
        f_tol: 1e-16,
        stall_iters: 20,
        ..Default::default()
    };
    let run = |k: usize| {
        let x0 = if k == 0 {
            vec![0.0; count]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let mut x: Vec<f64> = (0..count).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
            if nc {
                for f in factors(modes, false) {
                    if matches!(f.kind, FactorKind::Pair { block: Block::AA | Block::BB, .. }) {
                        x[f.param] = 0.0;
                    }
                }
            }
            x
        };
        let m = minimize(
            |x, g| {
                let phi = overlap_and_gradient(target, &fs, x, g);
                g.iter_mut().for_each(|v| *v = -*v);
                1.0 - phi
            },
            &x0,
            &opts,
        );
        let mut x = m.x;
        if m.f < 1e-4 {
            polish(target, &fs, &mut x, 20);
        }
        let mut g = vec![0.0; count];
        (overlap_and_gradient(target, &fs, &x, &mut g), x)
    };
    // Fixed chunks keep the result independent of the thread count.
    let mut best: Option<(usize, (f64, Vec<f64>))> = None;
    let starts: Vec<usize> = (0..=cfg.random_starts).collect();
    for chunk in starts.chunks(START_CHUNK) {
        let results: Vec<(f64, Vec<f64>)> = chunk.par_iter().map(|&k| run(k)).collect();
        for (&k, r) in chunk.iter().zip(results) {
            if best.as_ref().is_none_or(|(_, b)| r.0 > b.0) {
                best = Some((k, r));
            }
        }
        if best.as_ref().is_some_and(|(_, b)| 1.0 - b.0 < EXACT_GAP) {
            break;
        }
    }
    let (start, (_, x)) = best.expect("at least one start");
    let mut angles = BogAngleSet::from_vec(modes, &x).expect("length matches");
    angles.number_conserving = nc;
    let overlap = reconstruct(&angles).overlap(target);
    Decomposition { angles, overlap, start }
}

/// Finds angles maximizing `tr(R_t^T R(theta)) / 2M` by BFGS from the
/// zero start and `cfg.random_starts` random ones.
pub fn decompose(target: &OrthogonalTransform, cfg: &DecomposeConfig) -> Result<Decomposition> {
    let modes = target.modes();
    let r = target.matrix();
    let mut best = None;
    if cfg.number_conserving_fast_path && is_number_conserving(r) {
        let d = run_starts(r, modes, true, cfg);
        if d.overlap >= 1.0 - cfg.tol {
            best = Some(d);
        } else {
            log::info!("number-conserving layout reached 1 - {:.2e}; using the full layout", 1.0 - d.overlap);
        }
    }
    let d = match best {
        Some(d) => d,
        None => run_starts(r, modes, false, cfg),
    };
    let gap = 1.0 - d.overlap;
    if gap > cfg.warn_tol {
        return Err(Error::NoConvergence { what: "matchgate decomposition".into(), best: d.overlap });
    }
    if gap > cfg.tol {
        log::warn!("matchgate decomposition accepted at 1 - Phi = {gap:.2e}");
    }
    Ok(d)
}

/// The `U_Bog` circuit: one RZ layer then the layered matchgates.
pub fn emit_ubog(angles: &BogAngleSet) -> GateSequence {
    let m = angles.modes;
    let theta = angles.to_vec();
    let mut seq = GateSequence::new(m);
    let fs = factors(m, angles.number_conserving);
    let layers = fs.last().map_or(1, |f| f.layer + 1).max(if angles.number_conserving { 1 } else { ubog_depth(m) });
    seq.layers = vec![Vec::new(); layers];
    for f in &fs {
        let gate = match f.kind {
            FactorKind::Local { j } => Gate::rz(j, theta[f.param]),
            FactorKind::Pair { j, block } => block.gate(j, theta[f.param]),
        };
        seq.layers[f.layer].push(gate);
    }
    if angles.number_conserving {
        // no trailing empty layers in the short layout
        seq.layers.truncate(4 * cycles(m) + 1);
    }
    seq
}

/// `U_Bog^+ X..X |0..0>`: the quasiparticle vacuum of the decomposed
/// transform. With odd parity the last qubit keeps its occupied `|0>`.
pub fn ghf_state_circuit(angles: &BogAngleSet, odd_parity: bool) -> GateSequence {
    let m = angles.modes;
    let skip: &[usize] = if odd_parity && m > 0 { &[m - 1] } else { &[] };
    let mut seq = GateSequence::new(m);
    seq.push_layer(GateSequence::x_layer(m, skip));
    seq.extend(&emit_ubog(angles).inverse());
    seq
}
