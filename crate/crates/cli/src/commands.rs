use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use ldca_core::benchmark::{Benchmark, BenchmarkConfig};
use ldca_core::exact::{exact_ground_cached, exact_ground_checked, Sector};
use ldca_core::ghf::{solve_ghf, BogoliubovTransform};
use ldca_core::majorana::to_majorana;
use ldca_core::matchgate::{angle_count, ghf_state_circuit, ubog_depth};
use ldca_core::sim::{gradient_direct, gradient_hadamard_test, GateSite, Statevector};
use ldca_core::vqe::{warm_start, AnsatzRegistry, GhfReference};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Point};
use crate::svg::{render, Panel, Series};
use crate::CliError;

pub type CmdResult = Result<(), CliError>;

fn io(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Io(e.into())
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    if rows.is_empty() {
        w.write_record(header).map_err(io)?;
    }
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(io)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn sector_for(n: Option<f64>) -> Sector {
    match n {
        Some(n) if n >= 0.0 && n.fract() == 0.0 => Sector::Particles(n as usize),
        _ => Sector::Full,
    }
}

fn sector_name(s: Sector) -> String {
    match s {
        Sector::Full => "full".into(),
        Sector::Particles(n) => format!("N={n}"),
    }
}

fn status(e: &impl std::fmt::Display) -> String {
    format!("error: {e}")
}

#[derive(Serialize)]
struct GhfRow {
    model_id: String,
    sweep_value: String,
    ghf_energy: Option<f64>,
    purity_error: Option<f64>,
    commutator_residual: Option<f64>,
    exact_energy: Option<f64>,
    delta_e: Option<f64>,
    status: String,
}

const GHF_HEADER: [&str; 8] =
    ["model_id", "sweep_value", "ghf_energy", "purity_error", "commutator_residual", "exact_energy", "delta_e", "status"];

pub fn ghf(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let points = cfg.points().map_err(CliError::Config)?;
    let rows: Vec<GhfRow> = points
        .par_iter()
        .map(|p| {
            let mut row = GhfRow {
                model_id: cfg.id.clone(),
                sweep_value: p.label.clone(),
                ghf_energy: None,
                purity_error: None,
                commutator_residual: None,
                exact_energy: None,
                delta_e: None,
                status: "ok".into(),
            };
            let mut run = || -> ldca_core::Result<()> {
                let g = solve_ghf(&to_majorana(&p.spec)?, &cfg.ghf_options())?;
                row.ghf_energy = Some(g.energy);
                row.purity_error = Some(g.gamma.pure_state_error());
                row.commutator_residual = Some(g.residual);
                let e = exact_ground_cached(&p.spec, sector_for(cfg.n_target_for(&p.spec)))?;
                row.exact_energy = Some(e.energy);
                row.delta_e = Some(g.energy - e.energy);
                Ok(())
            };
            if let Err(e) = run() {
                row.status = status(&e);
            }
            row
        })
        .collect();
    write_csv(&out.join("ghf.csv"), &GHF_HEADER, &rows)?;
    finish(rows.iter().map(|r| r.status.as_str()))
}

#[derive(Serialize)]
struct ExactRow {
    model_id: String,
    sweep_value: String,
    sector: String,
    energy: Option<f64>,
    degeneracy: Option<usize>,
    residual: Option<f64>,
    status: String,
}

const EXACT_HEADER: [&str; 7] = ["model_id", "sweep_value", "sector", "energy", "degeneracy", "residual", "status"];

pub fn exact(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let points = cfg.points().map_err(CliError::Config)?;
    let rows: Vec<ExactRow> = points
        .par_iter()
        .map(|p| {
            let sector = sector_for(cfg.n_target_for(&p.spec));
            let mut row = ExactRow {
                model_id: cfg.id.clone(),
                sweep_value: p.label.clone(),
                sector: sector_name(sector),
                energy: None,
                degeneracy: None,
                residual: None,
                status: "ok".into(),
            };
            match exact_ground_checked(&p.spec, sector) {
                Ok(r) => {
                    row.energy = Some(r.energy);
                    row.degeneracy = Some(r.degeneracy());
                    row.residual = Some(r.residual);
                }
                Err(e) => row.status = status(&e),
            }
            row
        })
        .collect();
    write_csv(&out.join("exact.csv"), &EXACT_HEADER, &rows)?;
    finish(rows.iter().map(|r| r.status.as_str()))
}

#[derive(Clone, Serialize)]
struct VqeRow {
    model_id: String,
    sweep_value: String,
    ansatz: String,
    #[serde(rename = "L")]
    cycles: Option<usize>,
    energy: Option<f64>,
    exact_energy: Option<f64>,
    delta_e: Option<f64>,
    fidelity: Option<f64>,
    n: Option<f64>,
    evals: Option<usize>,
    wall_time: f64,
    status: String,
}

const VQE_HEADER: [&str; 12] = [
    "model_id",
    "sweep_value",
    "ansatz",
    "L",
    "energy",
    "exact_energy",
    "delta_e",
    "fidelity",
    "n",
    "evals",
    "wall_time",
    "status",
];

fn cycles_of(name: &str) -> Option<usize> {
    match name {
        "ghf" => Some(0),
        _ => name.strip_prefix("ldca-").and_then(|l| l.parse().ok()),
    }
}

fn vqe_point(cfg: &ExperimentConfig, p: &Point) -> Vec<VqeRow> {
    let blank = |name: &str| VqeRow {
        model_id: cfg.id.clone(),
        sweep_value: p.label.clone(),
        ansatz: name.to_string(),
        cycles: cycles_of(name),
        energy: None,
        exact_energy: None,
        delta_e: None,
        fidelity: None,
        n: None,
        evals: None,
        wall_time: 0.0,
        status: "ok".into(),
    };
    let bcfg = BenchmarkConfig {
        ghf: cfg.ghf_options(),
        decompose: cfg.decompose_config(),
        n_target: cfg.n_target_for(&p.spec),
        penalty: cfg.penalty,
    };
    let bench = match Benchmark::new(p.spec.clone(), &bcfg) {
        Ok(b) => b,
        Err(e) => {
            return cfg.ansatz.iter().map(|a| VqeRow { status: status(&e), ..blank(a) }).collect();
        }
    };
    let registry = AnsatzRegistry::default();
    let opts = cfg.vqe_options();
    let mut rows = Vec::new();
    let mut prev: Option<(String, Vec<f64>)> = None;
    for name in &cfg.ansatz {
        let t = Instant::now();
        let mut row = blank(name);
        row.exact_energy = Some(bench.exact.energy);
        let result = bench.build(&registry, name).and_then(|a| {
            let init = warm_start(prev.as_ref().map(|(f, x)| (f.as_str(), x.as_slice())), a.as_ref());
            let r = bench.run(a.as_ref(), init, &opts)?;
            Ok((a.family().to_string(), r))
        });
        match result {
            Ok((family, r)) => {
                row.energy = Some(r.energy);
                row.delta_e = Some(r.energy - bench.exact.energy);
                row.fidelity = r.fidelity;
                row.n = Some(r.number);
                row.evals = Some(r.evaluations);
                prev = Some((family, r.params));
            }
            Err(e) => row.status = status(&e),
        }
        row.wall_time = t.elapsed().as_secs_f64();
        rows.push(row);
    }
    rows
}

fn sweep_svg(cfg: &ExperimentConfig, rows: &[VqeRow]) -> String {
    let axis = cfg.sweep.as_ref().map_or("value".to_string(), |s| s.parameter.clone());
    let series = |f: &dyn Fn(&VqeRow) -> Option<f64>| -> Vec<Series> {
        cfg.ansatz
            .iter()
            .map(|name| Series {
                name: name.clone(),
                points: rows
                    .iter()
                    .filter(|r| &r.ansatz == name)
                    .filter_map(|r| Some((r.sweep_value.parse().ok()?, f(r)?)))
                    .collect(),
            })
            .collect()
    };
    let fidelity = Panel {
        title: format!("{}: fidelity", cfg.id),
        x_label: axis.clone(),
        y_label: "fidelity".into(),
        log_y: false,
        series: series(&|r| r.fidelity),
        hline: None,
    };
    let error = Panel {
        title: format!("{}: energy error", cfg.id),
        x_label: axis,
        y_label: "E - E_exact".into(),
        log_y: true,
        series: series(&|r| r.delta_e.map(f64::abs)),
        hline: cfg.accuracy_line().map(|v| (v, "chemical accuracy".to_string())),
    };
    render(&[fidelity, error])
}

pub fn vqe(cfg: &ExperimentConfig, out: &Path, svg: bool) -> CmdResult {
    let points = cfg.points().map_err(CliError::Config)?;
    let rows: Vec<VqeRow> = points.par_iter().flat_map_iter(|p| vqe_point(cfg, p)).collect();
    write_csv(&out.join("vqe.csv"), &VQE_HEADER, &rows)?;
    if svg && cfg.sweep.is_some() {
        let path = out.join(format!("{}.svg", cfg.id));
        fs::write(&path, sweep_svg(cfg, &rows)).map_err(io)?;
        log::info!("wrote {}", path.display());
    }
    finish(rows.iter().map(|r| r.status.as_str()))
}

#[derive(Serialize)]
struct Check {
    expected: usize,
    found: usize,
    ok: bool,
}

fn check(expected: usize, found: usize) -> Check {
    Check { expected, found, ok: expected == found }
}

#[derive(Serialize)]
struct CompileReport {
    modes: usize,
    odd_parity: bool,
    overlap: f64,
    angles: Check,
    two_qubit_gates: Check,
    phase_gates: Check,
    ubog_depth: Check,
    depth_with_prep: Check,
}

pub enum CompileInput {
    File(PathBuf),
    Identity(usize),
}

pub fn compile(input: &CompileInput, seed: u64, out: &Path) -> CmdResult {
    let bt = match input {
        CompileInput::File(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).map_err(CliError::Config)?;
            BogoliubovTransform::from_json(&text).map_err(|e| CliError::Config(e.into()))?
        }
        CompileInput::Identity(m) => BogoliubovTransform::identity(*m),
    };
    let cfg = ldca_core::matchgate::DecomposeConfig { seed, ..Default::default() };
    let reference = GhfReference::compile(bt, &cfg).map_err(|e| CliError::Numerical(anyhow!("decomposition failed: {e}")))?;
    let m = reference.modes();
    let circuit = ghf_state_circuit(&reference.angles, reference.target.odd_parity);
    let ubog = &reference.ubog;
    let c = m.div_ceil(2);
    let report = CompileReport {
        modes: m,
        odd_parity: reference.target.odd_parity,
        overlap: reference.overlap,
        angles: check(angle_count(m), reference.angles.count()),
        two_qubit_gates: check(4 * (m - 1) * c, ubog.two_qubit_count()),
        phase_gates: check(m, ubog.count(ldca_core::circuit::GateKind::Rz)),
        ubog_depth: check(ubog_depth(m), ubog.depth()),
        depth_with_prep: check(ubog_depth(m) + 1, circuit.depth()),
    };
    circuit.save(out.join("circuit.json")).map_err(io)?;
    let json = serde_json::to_string_pretty(&report).map_err(io)?;
    fs::write(out.join("compile_report.json"), &json).map_err(io)?;
    println!("{json}");
    let all = [&report.angles, &report.two_qubit_gates, &report.phase_gates, &report.ubog_depth, &report.depth_with_prep];
    if all.iter().all(|c| c.ok) {
        Ok(())
    } else {
        Err(CliError::Numerical(anyhow!("circuit counts differ from the closed-form values")))
    }
}

#[derive(Serialize)]
struct GradcheckReport {
    model_id: String,
    sweep_value: String,
    ansatz: String,
    samples: usize,
    sites: usize,
    max_abs_gradient: f64,
    max_finite_difference_error: f64,
    max_ancilla_deviation: f64,
    finite_difference_pass: bool,
    ancilla_pass: bool,
}

pub fn gradcheck(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let points = cfg.points().map_err(CliError::Config)?;
    let p = points.first().ok_or_else(|| CliError::Config(anyhow!("empty sweep")))?;
    let num = |e: ldca_core::Error| CliError::Numerical(e.into());
    let bcfg = BenchmarkConfig {
        ghf: cfg.ghf_options(),
        decompose: cfg.decompose_config(),
        n_target: cfg.n_target_for(&p.spec),
        penalty: cfg.penalty,
    };
    let bench = Benchmark::new(p.spec.clone(), &bcfg).map_err(num)?;
    let g = &cfg.gradcheck;
    let ansatz = bench.build(&AnsatzRegistry::default(), &g.ansatz).map_err(num)?;
    let n = ansatz.num_params();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pi = std::f64::consts::PI;
    let random_point = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(-pi..pi)).collect() };
    let value = |x: &[f64]| -> ldca_core::Result<f64> { Ok(bench.objective.evaluate(&ansatz.prepare(x)?).objective) };

    let (mut max_grad, mut fd_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..if n == 0 { 0 } else { g.samples } {
        let x = random_point(&mut rng);
        let k = rng.random_range(0..n);
        let mut grad = vec![0.0; n];
        ansatz.value_and_gradient(&x, &bench.objective, &mut grad).map_err(num)?;
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[k] += g.step;
        xm[k] -= g.step;
        let fd = (value(&xp).map_err(num)? - value(&xm).map_err(num)?) / (2.0 * g.step);
        max_grad = grad.iter().fold(max_grad, |a, v| a.max(v.abs()));
        fd_err = fd_err.max((grad[k] - fd).abs());
    }

    let terms: Vec<_> = bench.hamiltonian.terms().into_iter().filter(|t| !t.string().is_identity()).collect();
    let mut anc_err: f64 = 0.0;
    let mut sites_checked = 0;
    if !terms.is_empty() {
        for _ in 0..g.sites {
            let x = random_point(&mut rng);
            let Some(seq) = ansatz.circuit(&x) else { break };
            let sites: Vec<GateSite> = seq
                .layers
                .iter()
                .enumerate()
                .flat_map(|(l, layer)| {
                    layer.iter().enumerate().filter(|(_, g)| g.kind.is_rotation()).map(move |(i, _)| GateSite { layer: l, index: i })
                })
                .collect();
            if sites.is_empty() {
                break;
            }
            let site = sites[rng.random_range(0..sites.len())];
            let obs = &terms[rng.random_range(0..terms.len())];
            let psi0 = Statevector::zero(seq.qubits);
            let direct = gradient_direct(&seq, site, obs, &psi0).map_err(num)?;
            let anc = gradient_hadamard_test(&seq, site, obs, &psi0).map_err(num)?;
            anc_err = anc_err.max((direct - anc).abs());
            sites_checked += 1;
        }
    }
    let report = GradcheckReport {
        model_id: cfg.id.clone(),
        sweep_value: p.label.clone(),
        ansatz: g.ansatz.clone(),
        samples: g.samples,
        sites: sites_checked,
        max_abs_gradient: max_grad,
        max_finite_difference_error: fd_err,
        max_ancilla_deviation: anc_err,
        finite_difference_pass: fd_err < 1e-5,
        ancilla_pass: anc_err < 1e-9,
    };
    let json = serde_json::to_string_pretty(&report).map_err(io)?;
    fs::write(out.join("gradcheck.json"), &json).map_err(io)?;
    println!("{json}");
    if report.finite_difference_pass && report.ancilla_pass {
        Ok(())
    } else {
        Err(CliError::Numerical(anyhow!("gradient check failed")))
    }
}

/// Rows carry their own failures; any failed row makes the run a numerical
/// failure once all outputs are written.
fn finish<'a>(statuses: impl Iterator<Item = &'a str>) -> CmdResult {
    let failed = statuses.filter(|s| *s != "ok").count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Numerical(anyhow!("{failed} row(s) failed")))
    }
}
