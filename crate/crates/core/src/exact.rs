//! Exact ground states by dense diagonalization or Lanczos, in the full
//! Fock space or a fixed particle-number sector.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fermion::HamiltonianSpec;
use crate::jw::hamiltonian_to_qubits;
use crate::linalg::{hermitian_eigen, symmetric_eigen};
use crate::pauli::CompiledOperator;
use crate::sim::Statevector;

/// Largest register diagonalized densely.
pub const DENSE_LIMIT: usize = 10;
pub const MAX_MODES: usize = 14;
/// Default width of the ground manifold.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Dense,
    Lanczos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    Full,
    Particles(usize),
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub energy: f64,
    /// Orthonormal basis of the ground manifold; the first is the state
    /// reported as the ground state.
    pub manifold: Vec<Statevector>,
    pub sector: Sector,
    pub backend: Backend,
    pub residual: f64,
}

impl SpectrumResult {
    pub fn state(&self) -> &Statevector {
        &self.manifold[0]
    }

    pub fn degeneracy(&self) -> usize {
        self.manifold.len()
    }

    /// Weight of `psi` on the ground manifold.
    pub fn fidelity(&self, psi: &Statevector) -> Result<f64> {
        crate::sim::subspace_fidelity(psi, &self.manifold)
    }
}

/// Basis indices of the sector; a qubit in `|0>` is an occupied mode.
fn sector_basis(modes: usize, sector: Sector) -> Vec<usize> {
    (0..1usize << modes)
        .filter(|b| match sector {
            Sector::Full => true,
            Sector::Particles(n) => modes - b.count_ones() as usize == n,
        })
        .collect()
}

struct Problem {
    modes: usize,
    op: CompiledOperator,
    basis: Vec<usize>,
}

impl Problem {
    fn new(spec: &HamiltonianSpec, sector: Sector) -> Result<Self> {
        spec.validate()?;
        if spec.modes > MAX_MODES {
            return Err(Error::Unsupported(format!("exact diagonalization is limited to {MAX_MODES} modes")));
        }
        if let Sector::Particles(n) = sector {
            if !spec.conserves_number() {
                return Err(Error::invalid("particle-number sector requested for a Hamiltonian that does not conserve it"));
            }
            if n > spec.modes {
                return Err(Error::invalid(format!("{n} particles in {} modes", spec.modes)));
            }
        }
        let op = hamiltonian_to_qubits(spec)?.compile();
        Ok(Self { modes: spec.modes, op, basis: sector_basis(spec.modes, sector) })
    }

    fn embed(&self, v: &DVector<Complex64>) -> Statevector {
        let mut amps = vec![Complex64::default(); 1 << self.modes];
        for (i, &b) in self.basis.iter().enumerate() {
            amps[b] = v[i];
        }
        Statevector::from_raw(amps)
    }

    fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let full = self.op.apply_vec(self.embed(v).amplitudes());
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|&b| full[b]))
    }

    fn dense(&self) -> DMatrix<Complex64> {
        let mut index = vec![usize::MAX; 1 << self.modes];
        for (i, &b) in self.basis.iter().enumerate() {
            index[b] = i;
        }
        let d = self.basis.len();
        let mut h = DMatrix::zeros(d, d);
        for (x, z, c) in self.op.masks() {
            for (j, &b) in self.basis.iter().enumerate() {
                let i = index[b ^ x];
                if i != usize::MAX {
                    let sign = if (z & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                    h[(i, j)] += c * sign;
                }
            }
        }
        h
    }

    fn residual(&self, e: f64, v: &DVector<Complex64>) -> f64 {
        (self.apply(v) - v * Complex64::new(e, 0.0)).norm()
    }
}

fn manifold_tol(e: f64, tol: f64) -> f64 {
    tol * e.abs().max(1.0)
}

fn solve_dense(p: &Problem, tol: f64) -> Result<(f64, Vec<DVector<Complex64>>)> {
    let (vals, vecs) = hermitian_eigen(&p.dense())?;
    let e0 = vals[0];
    let states = (0..vals.len())
        .take_while(|&i| vals[i] - e0 <= manifold_tol(e0, tol))
        .map(|i| vecs.column(i).into_owned())
        .collect();
    Ok((e0, states))
}

fn orthogonalize(v: &mut DVector<Complex64>, against: &[DVector<Complex64>]) {
    for _ in 0..2 {
        for q in against {
            let c = q.dotc(v);
            *v -= q * c;
        }
    }
}

/// Lowest eigenpair orthogonal to `locked`, by restarted Lanczos with full
/// reorthogonalization.
fn lanczos_lowest(p: &Problem, locked: &[DVector<Complex64>], seed: u64) -> Result<(f64, DVector<Complex64>)> {
    let d = p.basis.len();
    let free = d - locked.len();
    if free == 0 {
        return Err(Error::invalid("no states left outside the locked set"));
    }
    let kmax = free.min(120);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = DVector::from_fn(d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let mut best = (f64::INFINITY, start.clone());
    for _ in 0..50 {
        orthogonalize(&mut start, locked);
        let mut q = start.normalize();
        let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(kmax);
        let mut alpha = Vec::with_capacity(kmax);
        let mut beta: Vec<f64> = Vec::with_capacity(kmax);
        let mut scale: f64 = 0.0;
        loop {
            basis.push(q.clone());
            let mut w = p.apply(&q);
            let a = q.dotc(&w).re;
            alpha.push(a);
            scale = scale.max(a.abs()).max(w.norm());
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, locked);
            if basis.len() == kmax {
                break;
            }
            let mut b = w.norm();
            if b < 1e-8 * scale.max(1.0) {
                // near-invariant subspace: continue from a fresh direction
                w = DVector::from_fn(d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
                orthogonalize(&mut w, &basis);
                orthogonalize(&mut w, locked);
                if w.norm() < 1e-8 {
                    break;
                }
                beta.push(0.0);
                b = w.norm();
            } else {
                beta.push(b);
            }
            q = w / Complex64::new(b, 0.0);
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| match i.abs_diff(j) {
            0 => alpha[i],
            1 => beta[i.min(j)],
            _ => 0.0,
        });
        let (_, vecs) = symmetric_eigen(&t)?;
        let mut ritz = DVector::zeros(d);
        for (i, qi) in basis.iter().enumerate() {
            ritz += qi * Complex64::new(vecs[(i, 0)], 0.0);
        }
        orthogonalize(&mut ritz, locked);
        let ritz = ritz.normalize();
        let e = p.apply(&ritz).dotc(&ritz).re;
        let r = p.residual(e, &ritz);
        best = (e, ritz.clone());
        if r < 1e-10 {
            return Ok(best);
        }
        start = ritz;
    }
    let r = p.residual(best.0, &best.1);
    if r < 1e-9 {
        return Ok(best);
    }
    Err(Error::NoConvergence { what: "Lanczos".into(), best: r })
}

fn solve_lanczos(p: &Problem, tol: f64) -> Result<(f64, Vec<DVector<Complex64>>)> {
    let (e0, v0) = lanczos_lowest(p, &[], 0)?;
    let mut states = vec![v0];
    while states.len() < p.basis.len() {
        let (e, v) = lanczos_lowest(p, &states, states.len() as u64)?;
        if e - e0 > manifold_tol(e0, tol) {
            break;
        }
        states.push(v);
    }
    Ok((e0, states))
}

pub fn exact_ground_with(spec: &HamiltonianSpec, sector: Sector, backend: Backend, tol: f64) -> Result<SpectrumResult> {
    let p = Problem::new(spec, sector)?;
    let (energy, states) = match backend {
        Backend::Dense => solve_dense(&p, tol)?,
        Backend::Lanczos => solve_lanczos(&p, tol)?,
    };
    let residual = states.iter().map(|v| p.residual(energy, v)).fold(0.0, f64::max);
    if residual > 1e-9 {
        return Err(Error::NoConvergence { what: "ground-state residual".into(), best: residual });
    }
    Ok(SpectrumResult { energy, manifold: states.iter().map(|v| p.embed(v)).collect(), sector, backend, residual })
}

/// Dense up to [`DENSE_LIMIT`] modes, Lanczos above.
pub fn exact_ground(spec: &HamiltonianSpec, sector: Sector) -> Result<SpectrumResult> {
    let backend = if spec.modes <= DENSE_LIMIT { Backend::Dense } else { Backend::Lanczos };
    exact_ground_with(spec, sector, backend, DEGENERACY_TOL)
}

/// Runs both backends and fails when their energies differ by more than
/// `1e-8`; returns the dense result.
pub fn exact_ground_checked(spec: &HamiltonianSpec, sector: Sector) -> Result<SpectrumResult> {
    let dense = exact_ground_with(spec, sector, Backend::Dense, DEGENERACY_TOL)?;
    let lanczos = exact_ground_with(spec, sector, Backend::Lanczos, DEGENERACY_TOL)?;
    let gap = (dense.energy - lanczos.energy).abs();
    if gap > 1e-8 || dense.degeneracy() != lanczos.degeneracy() {
        return Err(Error::NoConvergence { what: "dense/Lanczos agreement".into(), best: gap });
    }
    Ok(dense)
}

/// Eigenvalues within `tol` of the minimum, counted in the full space.
pub fn degeneracy_report(spec: &HamiltonianSpec, tol: f64) -> Result<usize> {
    let p = Problem::new(spec, Sector::Full)?;
    let (vals, _) = hermitian_eigen(&p.dense())?;
    Ok(vals.iter().filter(|v| **v - vals[0] <= tol).count())
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    energy: f64,
    sector: Sector,
    backend: Backend,
    residual: f64,
    manifold: Vec<Vec<[f64; 2]>>,
}

/// Content hash of the Hamiltonian and sector.
pub fn cache_key(spec: &HamiltonianSpec, sector: Sector) -> Result<String> {
    let mut h = Sha256::new();
    h.update(spec.to_operator().to_json()?.as_bytes());
    h.update(serde_json::to_string(&sector)?.as_bytes());
    Ok(hex::encode(h.finalize()))
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("LDCA_CACHE_DIR").map(PathBuf::from)
}

fn load_cached(path: &Path) -> Option<SpectrumResult> {
    let entry: CacheEntry = serde_json::from_str(&std::fs::read_to_string(path).ok()?).ok()?;
    let manifold = entry
        .manifold
        .into_iter()
        .map(|v| Statevector::from_amplitudes(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()))
        .collect::<Result<Vec<_>>>()
        .ok()?;
    (!manifold.is_empty()).then_some(SpectrumResult {
        energy: entry.energy,
        manifold,
        sector: entry.sector,
        backend: entry.backend,
        residual: entry.residual,
    })
}

/// [`exact_ground`], reading and writing `LDCA_CACHE_DIR` when it is set.
pub fn exact_ground_cached(spec: &HamiltonianSpec, sector: Sector) -> Result<SpectrumResult> {
    match cache_dir() {
        Some(dir) => exact_ground_cached_in(&dir, spec, sector),
        None => exact_ground(spec, sector),
    }
}

pub fn exact_ground_cached_in(dir: &Path, spec: &HamiltonianSpec, sector: Sector) -> Result<SpectrumResult> {
    let path = dir.join(format!("{}.json", cache_key(spec, sector)?));
    if let Some(r) = load_cached(&path) {
        return Ok(r);
    }
    let r = exact_ground(spec, sector)?;
    let entry = CacheEntry {
        energy: r.energy,
        sector,
        backend: r.backend,
        residual: r.residual,
        manifold: r.manifold.iter().map(|s| s.amplitudes().iter().map(|a| [a.re, a.im]).collect()).collect(),
    };
    std::fs::create_dir_all(dir)?;
    std::fs::write(&path, serde_json::to_string(&entry)?)?;
    Ok(r)
}
