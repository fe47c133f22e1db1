use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::registry::{Ansatz, AnsatzRegistry};
use super::{GhfReference, Objective};
use crate::error::{Error, Result};
use crate::optim::{minimize, BfgsOptions, Termination};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VqeOptions {
    /// Perturbed starts besides the unperturbed one.
    pub restarts: usize,
    /// Half-width of the uniform perturbation, in radians.
    pub perturbation: f64,
    pub seed: u64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for VqeOptions {
    fn default() -> Self {
        Self { restarts: 12, perturbation: 0.01, seed: 0, max_iters: 3000, grad_tol: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub start: usize,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    pub ansatz: String,
    pub energy: f64,
    pub objective: f64,
    pub number: f64,
    pub params: Vec<f64>,
    pub fidelity: Option<f64>,
    pub evaluations: usize,
    pub best_start: usize,
    pub restarts: Vec<RestartSummary>,
    /// Objective after each evaluation of the winning start.
    pub trace: Vec<f64>,
}

struct Run {
    summary: RestartSummary,
    x: Vec<f64>,
    trace: Vec<f64>,
}

fn start_point(init: &[f64], k: usize, opts: &VqeOptions) -> Vec<f64> {
    if k == 0 {
        return init.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(k as u64);
    let w = opts.perturbation;
    init.iter().map(|x| x + if w > 0.0 { rng.random_range(-w..=w) } else { 0.0 }).collect()
}

/// Quasi-Newton search from `init` (zeros when absent, zero-padded when
/// short) and `opts.restarts` perturbed copies; the lowest objective wins,
/// ties going to the earlier start.
pub fn optimize(ansatz: &dyn Ansatz, obj: &Objective, init: Option<&[f64]>, opts: &VqeOptions) -> Result<VqeResult> {
    let n = ansatz.num_params();
    let mut x0 = init.map(<[f64]>::to_vec).unwrap_or_default();
    if x0.len() > n {
        return Err(Error::DimensionMismatch { expected: n, found: x0.len() });
    }
    x0.resize(n, 0.0);
    let bfgs = BfgsOptions { max_iters: opts.max_iters, grad_tol: opts.grad_tol, stall_iters: 10, ..Default::default() };
    let failure = Mutex::new(None);
    let runs: Vec<Run> = (0..=opts.restarts)
        .into_par_iter()
        .map(|k| {
            let mut trace = Vec::new();
            let m = minimize(
                |x, g| match ansatz.value_and_gradient(x, obj, g) {
                    Ok(v) => {
                        trace.push(v.objective);
                        v.objective
                    }
                    Err(e) => {
                        failure.lock().expect("poisoned").get_or_insert(e);
                        f64::INFINITY
                    }
                },
                &start_point(&x0, k, opts),
                &bfgs,
            );
            let summary = RestartSummary {
                start: k,
                objective: m.f,
                iterations: m.iterations,
                evaluations: m.evaluations,
                termination: m.termination,
            };
            Run { summary, x: m.x, trace }
        })
        .collect();
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    if runs.iter().all(|r| r.summary.termination == Termination::LineSearch && r.summary.iterations <= 1) {
        let best = runs.iter().map(|r| r.summary.objective).fold(f64::INFINITY, f64::min);
        return Err(Error::NoConvergence { what: format!("{} optimization", ansatz.name()), best });
    }
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.summary.objective.total_cmp(&b.1.summary.objective).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one start");
    let psi = ansatz.prepare(&runs[best].x)?;
    let v = obj.evaluate(&psi);
    Ok(VqeResult {
        ansatz: ansatz.name().to_string(),
        energy: v.energy,
        objective: v.objective,
        number: v.number,
        params: runs[best].x.clone(),
        fidelity: None,
        evaluations: runs.iter().map(|r| r.summary.evaluations).sum(),
        best_start: best,
        trace: runs[best].trace.clone(),
        restarts: runs.into_iter().map(|r| r.summary).collect(),
    })
}

/// Previous optimum as a starting point, when it comes from the same family
/// and fits.
pub fn warm_start<'a>(prev: Option<(&str, &'a [f64])>, ansatz: &dyn Ansatz) -> Option<&'a [f64]> {
    prev.filter(|(family, p)| *family == ansatz.family() && p.len() <= ansatz.num_params()).map(|(_, p)| p)
}

/// Optimizes `names` in order, warm-starting each from the previous optimum
/// of its family padded with zeros.
pub fn optimize_ladder(
    registry: &AnsatzRegistry,
    names: &[&str],
    reference: &GhfReference,
    obj: &Objective,
    opts: &VqeOptions,
) -> Result<Vec<VqeResult>> {
    let mut out: Vec<VqeResult> = Vec::new();
    let mut prev: Option<(String, usize)> = None;
    for name in names {
        let ansatz = registry.build(name, reference)?;
        let init = warm_start(prev.as_ref().map(|(f, i)| (f.as_str(), out[*i].params.as_slice())), ansatz.as_ref());
        out.push(optimize(ansatz.as_ref(), obj, init, opts)?);
        prev = Some((ansatz.family().to_string(), out.len() - 1));
    }
    Ok(out)
}
