use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{effective_hamiltonian, ghf_energy, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::linalg::{commutator, complexify, expm, hermitian_function};
use crate::majorana::MajoranaHamiltonian;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImaginaryTimeOptions {
    pub step: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ImaginaryTimeOptions {
    fn default() -> Self {
        Self { step: 0.05, tol: 1e-9, max_iters: 20_000 }
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub gamma: CovarianceMatrix,
    pub energy: f64,
    /// `||[h, G]||_F` at the returned state.
    pub residual: f64,
    pub iterations: usize,
    /// Energy after every accepted step, starting with the input.
    pub energies: Vec<f64>,
}

fn residual(h: &MajoranaHamiltonian, g: &CovarianceMatrix) -> Result<(DMatrix<f64>, f64)> {
    let eff = effective_hamiltonian(h, g)?;
    let c = commutator(&eff, g.matrix());
    let norm = c.norm();
    Ok((c, norm))
}

/// Imaginary-time flow `G <- O G O^T`, `O = exp(2 dt [h(G), G])`. Steps that
/// raise the energy are rejected and the step halved; accepted steps let it
/// grow back up to the initial value.
pub fn imaginary_time_evolve(
    h: &MajoranaHamiltonian,
    gamma0: &CovarianceMatrix,
    opts: &ImaginaryTimeOptions,
) -> Result<Evolution> {
    if !(opts.step > 0.0) {
        return Err(Error::invalid("imaginary-time step must be positive"));
    }
    let err = gamma0.pure_state_error();
    if err > 1e-8 {
        return Err(Error::NotPure(err));
    }
    let mut g = gamma0.clone();
    let mut e = ghf_energy(h, &g)?;
    let (mut c, mut res) = residual(h, &g)?;
    let mut energies = vec![e];
    let mut dt = opts.step;
    let mut it = 0;
    while it < opts.max_iters && res >= opts.tol {
        it += 1;
        let o = expm(&(&c * (2.0 * dt)));
        let trial = g.conjugated(&o);
        let et = ghf_energy(h, &trial)?;
        if et <= e + 1e-12 * e.abs().max(1.0) {
            g = trial;
            e = et;
            energies.push(e);
            (c, res) = residual(h, &g)?;
            dt = (dt * 1.25).min(opts.step);
            if it % 200 == 0 {
                g = g.purified()?;
            }
        } else {
            dt *= 0.5;
            if dt < 1e-14 {
                break;
            }
        }
    }
    Ok(Evolution { gamma: g, energy: e, residual: res, iterations: it, energies })
}

/// `i tanh(beta * i h)` as a real antisymmetric matrix; `beta = inf` gives
/// the sign function.
fn thermal_covariance(eff: &DMatrix<f64>, beta: f64) -> Result<DMatrix<f64>> {
    let k = complexify(eff) * Complex64::new(0.0, 1.0);
    let f = hermitian_function(&k, |x| if beta.is_infinite() { x.signum() } else { (beta * x).tanh() })?;
    Ok((f * Complex64::new(0.0, 1.0)).map(|z| z.re))
}

/// Self-consistent iteration `G <- i tanh(2 beta i h(G))` along a ramp of
/// `beta` ending in the zero-temperature limit. The lowest-energy pure
/// iterate is returned; the input is kept if nothing improves on it.
pub fn fixed_point_refine(h: &MajoranaHamiltonian, gamma: &CovarianceMatrix, betas: &[f64]) -> Result<Evolution> {
    let err = gamma.pure_state_error();
    if err > 1e-6 {
        return Err(Error::NotPure(err));
    }
    let e0 = ghf_energy(h, gamma)?;
    let mut best = (gamma.clone(), e0);
    let mut energies = vec![e0];
    let mut g = gamma.clone();
    let mut iterations = 0;
    let schedule: Vec<f64> = betas.iter().copied().chain([f64::INFINITY]).collect();
    for &beta in &schedule {
        for _ in 0..200 {
            iterations += 1;
            let eff = effective_hamiltonian(h, &g)?;
            let next = CovarianceMatrix::from_raw(thermal_covariance(&eff, 2.0 * beta)?);
            let change = (next.matrix() - g.matrix()).amax();
            g = next;
            if beta.is_infinite() {
                let e = ghf_energy(h, &g)?;
                energies.push(e);
                // zero modes of h(G) give a mixed sign-function iterate
                if e < best.1 && g.pure_state_error() < 1e-8 {
                    best = (g.clone(), e);
                }
            }
            if change < 1e-10 {
                break;
            }
        }
    }
    let (_, res) = residual(h, &best.0)?;
    Ok(Evolution { gamma: best.0, energy: best.1, residual: res, iterations, energies })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GhfOptions {
    pub imaginary_time: ImaginaryTimeOptions,
    pub betas: Vec<f64>,
    /// Random pure starting points tried besides the vacuum.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GhfOptions {
    fn default() -> Self {
        Self {
            imaginary_time: ImaginaryTimeOptions::default(),
            betas: vec![1.0, 10.0, 100.0],
            restarts: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GhfResult {
    pub gamma: CovarianceMatrix,
    pub energy: f64,
    pub residual: f64,
    /// 0 is the vacuum start, `k > 0` the k-th random start.
    pub start: usize,
    /// Final energy of every start.
    pub start_energies: Vec<f64>,
}

/// Starting covariance `k` of the restart pipeline.
pub fn starting_point(modes: usize, seed: u64, k: usize) -> CovarianceMatrix {
    if k == 0 {
        return CovarianceMatrix::vacuum(modes);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    CovarianceMatrix::random_pure(modes, &mut rng)
}

fn run_start(h: &MajoranaHamiltonian, opts: &GhfOptions, k: usize) -> Result<Evolution> {
    let g0 = starting_point(h.modes, opts.seed, k);
    let a = imaginary_time_evolve(h, &g0, &opts.imaginary_time)?;
    let b = fixed_point_refine(h, &a.gamma, &opts.betas)?;
    Ok(if b.energy < a.energy { b } else { a })
}

/// Imaginary time followed by fixed-point refinement from the vacuum and
/// `opts.restarts` random pure states; the lowest energy wins, ties going
/// to the earlier start.
pub fn solve_ghf(h: &MajoranaHamiltonian, opts: &GhfOptions) -> Result<GhfResult> {
    if h.has_three_body() {
        return Err(Error::Unsupported("three-body terms in the GHF solver".into()));
    }
    let runs: Vec<Result<Evolution>> = (0..=opts.restarts).into_par_iter().map(|k| run_start(h, opts, k)).collect();
    let mut best: Option<(usize, Evolution)> = None;
    let mut start_energies = Vec::with_capacity(runs.len());
    for (k, r) in runs.into_iter().enumerate() {
        let r = r?;
        start_energies.push(r.energy);
        if best.as_ref().is_none_or(|(_, b)| r.energy < b.energy - 1e-12) {
            best = Some((k, r));
        }
    }
    let (start, ev) = best.expect("at least one start");
    log::debug!("GHF energy {:.12} from start {start}", ev.energy);
    Ok(GhfResult { gamma: ev.gamma, energy: ev.energy, residual: ev.residual, start, start_energies })
}

/// Ground covariance of a quadratic Hamiltonian, `i sign(i T)`.
pub fn quadratic_ground_covariance(h: &MajoranaHamiltonian) -> Result<CovarianceMatrix> {
    if !h.is_quadratic() {
        return Err(Error::invalid("Hamiltonian is not quadratic"));
    }
    Ok(CovarianceMatrix::from_raw(thermal_covariance(&h.t, f64::INFINITY)?))
}
