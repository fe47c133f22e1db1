//! Acceptance criteria, one PASS/FAIL line each.
//!
//! `cargo test --test acceptance -- 3 4` runs a subset by number; any other
//! word selects criteria whose name contains it.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use ldca_core::benchmark::{Benchmark, BenchmarkConfig};
use ldca_core::circuit::{GateKind, GateSequence};
use ldca_core::fermion::{build_hubbard, build_ppp, hubbard_mode, HamiltonianSpec, HubbardParams, PppParams, PppTable};
use ldca_core::fock;
use ldca_core::ghf::{
    extract_bogoliubov, imaginary_time_evolve, starting_point, wick_expectation, BogoliubovTransform,
    CovarianceMatrix, ImaginaryTimeOptions,
};
use ldca_core::jw::majorana_qubit;
use ldca_core::linalg::{max_norm, pfaffian, random_orthogonal};
use ldca_core::majorana::to_majorana;
use ldca_core::matchgate::{angle_count, decompose, emit_ubog, ubog_depth, BogAngleSet, DecomposeConfig, OrthogonalTransform};
use ldca_core::sim::{gradient_direct, gradient_hadamard_test, GateSite, Statevector};
use ldca_core::vqe::{ldca_parameter_count, AnsatzRegistry, GhfReference, VqeOptions, VqeResult};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Criterion = (usize, &'static str, Option<Duration>, fn() -> Outcome);

const MIN: u64 = 60;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [Criterion; 12] = [
        (1, "ghf-exact-on-quadratic", Some(Duration::from_secs(10)), c1_ghf_exact),
        (2, "two-site-ldca1-buccsd", Some(Duration::from_secs(2 * MIN)), c2_two_site),
        (3, "plaquette-ldca2-exact", Some(Duration::from_secs(2 * 30 * MIN)), c3_ldca2),
        (4, "ordering-at-strong-u", Some(Duration::from_secs(30 * MIN)), c4_ordering),
        (5, "pairing-field-trend", None, c5_pairing_trend),
        (6, "compiler-counts", Some(Duration::from_secs(1)), c6_counts),
        (7, "conjugation-identity", None, c7_conjugation),
        (8, "decomposition-fidelity", Some(Duration::from_secs(5 * MIN)), c8_decomposition),
        (9, "gradient-checks", Some(Duration::from_secs(5 * MIN)), c9_gradients),
        (10, "parameter-depth-formulas", None, c10_formulas),
        (11, "ghf-machinery", None, c11_ghf_properties),
        (12, "ppp-property-suite", None, c12_ppp),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (n, name, budget, run) in criteria {
        let picked = args.is_empty()
            || args.iter().any(|a| a.parse::<usize>().map_or_else(|_| name.contains(a.as_str()), |k| k == n));
        if !picked {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let o = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = t.elapsed();
        let over = budget.is_some_and(|b| elapsed > b);
        let pass = o.pass && !over;
        if !pass {
            failed += 1;
        }
        let budget_note = if over { " over budget" } else { "" };
        println!(
            "criterion {n:>2} {:<26} {} | {} | {:.1}s{budget_note}",
            name,
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn hubbard(nx: usize, ny: usize, u: f64, delta: f64) -> HamiltonianSpec {
    build_hubbard(&HubbardParams { nx, ny, t: 1.0, u, mu: 0.0, delta }).unwrap()
}

fn bench(spec: HamiltonianSpec, n_target: Option<f64>) -> Benchmark {
    Benchmark::new(spec, &BenchmarkConfig { n_target, ..Default::default() }).unwrap()
}

fn opts(restarts: usize, perturbation: f64) -> VqeOptions {
    VqeOptions { restarts, perturbation, max_iters: 5000, ..Default::default() }
}

/// `ldca-1` from the GHF point, then `ldca-2` warm started from it.
fn ldca_ladder(b: &Benchmark) -> (VqeResult, VqeResult) {
    let reg = AnsatzRegistry::default();
    let o = opts(4, 0.5);
    let a1 = b.build(&reg, "ldca-1").unwrap();
    let r1 = b.run(a1.as_ref(), None, &o).unwrap();
    let a2 = b.build(&reg, "ldca-2").unwrap();
    let r2 = b.run(a2.as_ref(), Some(&r1.params), &o).unwrap();
    (r1, r2)
}

fn buccsd(b: &Benchmark, restarts: usize) -> VqeResult {
    let a = b.build(&AnsatzRegistry::default(), "buccsd").unwrap();
    b.run(a.as_ref(), None, &opts(restarts, 0.5)).unwrap()
}

struct PlaquetteRun {
    bench: Benchmark,
    ldca1: VqeResult,
    ldca2: VqeResult,
}

/// Half-filled 2x2 runs shared between criteria.
fn plaquette(u: f64) -> Arc<PlaquetteRun> {
    static RUNS: OnceLock<Mutex<BTreeMap<u64, Arc<PlaquetteRun>>>> = OnceLock::new();
    let runs = RUNS.get_or_init(Default::default);
    if let Some(r) = runs.lock().unwrap().get(&u.to_bits()) {
        return r.clone();
    }
    let bench = bench(hubbard(2, 2, u, 0.0), Some(4.0));
    let (ldca1, ldca2) = ldca_ladder(&bench);
    let r = Arc::new(PlaquetteRun { bench, ldca1, ldca2 });
    runs.lock().unwrap().insert(u.to_bits(), r.clone());
    r
}

fn c1_ghf_exact() -> Outcome {
    // full Fock space: the open plaquette has zero modes, so at mu = 0 the
    // free ground manifold spans several particle numbers
    let b = bench(hubbard(2, 2, 0.0, 0.0), None);
    let de = (b.ghf.energy - b.exact.energy).abs();
    let fid = b.ghf_fidelity().unwrap();
    outcome(de < 1e-8 && fid >= 1.0 - 1e-8, format!("|dE| {de:.2e}, infidelity {:.1e}", 1.0 - fid))
}

fn c2_two_site() -> Outcome {
    let reg = AnsatzRegistry::default();
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for u in [0.0, 2.0, 4.0, 8.0] {
        let b = bench(hubbard(2, 1, u, 0.0), Some(2.0));
        for name in ["ldca-1", "buccsd"] {
            let a = b.build(&reg, name).unwrap();
            let r = b.run(a.as_ref(), None, &opts(4, 0.5)).unwrap();
            let de = r.energy - b.exact.energy;
            worst = worst.max(de.abs());
            rows.push(format!("U={u} {name} {de:.1e}"));
        }
    }
    outcome(worst < 1e-6, format!("max |dE| {worst:.2e} [{}]", rows.join(", ")))
}

fn c3_ldca2() -> Outcome {
    let mut pass = true;
    let mut rows = Vec::new();
    for u in [2.0, 8.0] {
        let r = plaquette(u);
        let de = r.ldca2.energy - r.bench.exact.energy;
        let fid = r.ldca2.fidelity.unwrap();
        pass &= de.abs() < 1e-6 && fid >= 1.0 - 1e-5;
        rows.push(format!("U={u}: dE {de:.1e}, infidelity {:.1e}", 1.0 - fid));
    }
    outcome(pass, rows.join("; "))
}

fn c4_ordering() -> Outcome {
    let r = plaquette(8.0);
    let ghf = r.bench.ghf_fidelity().unwrap();
    let l1 = r.ldca1.fidelity.unwrap();
    let bu = buccsd(&r.bench, 8).fidelity.unwrap();
    let pass = ghf <= l1 + 1e-6 && l1 <= bu + 1e-6;
    outcome(pass, format!("GHF {ghf:.6} <= LDCA-1 {l1:.6} <= BUCCSD {bu:.6}"))
}

fn c5_pairing_trend() -> Outcome {
    let grid = [0.0, 0.5, 1.0, 2.0, 4.0];
    let names = ["GHF", "LDCA-1", "LDCA-2", "BUCCSD"];
    let mut fid = vec![Vec::new(); names.len()];
    for delta in grid {
        // number is conserved only without the pairing field
        let n = (delta == 0.0).then_some(4.0);
        let b = bench(hubbard(2, 2, -8.0, delta), n);
        let (l1, l2) = ldca_ladder(&b);
        fid[0].push(b.ghf_fidelity().unwrap());
        fid[1].push(l1.fidelity.unwrap());
        fid[2].push(l2.fidelity.unwrap());
        fid[3].push(buccsd(&b, 4).fidelity.unwrap());
    }
    let mut pass = true;
    let mut rows = Vec::new();
    for (name, f) in names.iter().zip(&fid) {
        let ok = f.windows(2).all(|w| w[1] >= w[0] - 1e-6);
        pass &= ok;
        let vals: Vec<String> = f.iter().map(|v| format!("{v:.6}")).collect();
        rows.push(format!("{name} {}{}", vals.join(" "), if ok { "" } else { " (decreases)" }));
    }
    outcome(pass, rows.join("; "))
}

fn c6_counts() -> Outcome {
    let m = 8;
    let seq = emit_ubog(&BogAngleSet::zeros(m));
    let two = seq.two_qubit_count();
    let rz = seq.count(GateKind::Rz);
    let depth = seq.depth();
    let mut full = GateSequence::new(m);
    full.push_layer(GateSequence::x_layer(m, &[]));
    full.extend(&seq.inverse());
    let angles = angle_count(m);
    let pass = two == 112 && rz == 8 && depth == 33 && full.depth() == 34 && angles == 2 * m * m - m;
    outcome(pass, format!("{two} two-qubit, {rz} phase, depth {depth} ({} with X-prep), {angles} angles", full.depth()))
}

fn dense_ops(m: usize) -> Vec<DMatrix<Complex64>> {
    (0..2 * m).map(|k| majorana_qubit(k, m).unwrap().to_dense()).collect()
}

fn unitary(seq: &GateSequence) -> DMatrix<Complex64> {
    let dim = 1 << seq.qubits;
    let mut u = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut s = Statevector::basis(seq.qubits, c);
        s.apply_sequence(seq).unwrap();
        u.set_column(c, &DVector::from_column_slice(s.amplitudes()));
    }
    u
}

fn state_covariance(g: &[DMatrix<Complex64>], psi: &Statevector) -> DMatrix<f64> {
    let v = DVector::from_column_slice(psi.amplitudes());
    let n = g.len();
    DMatrix::from_fn(n, n, |k, l| {
        let comm = &g[k] * &g[l] - &g[l] * &g[k];
        (v.dotc(&(comm * &v)) * Complex64::new(0.0, 0.5)).re
    })
}

fn c7_conjugation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut conj_err, mut cov_err): (f64, f64) = (0.0, 0.0);
    for trial in 0..20 {
        let m = 2 + trial % 3;
        let gamma = CovarianceMatrix::random_pure(m, &mut rng);
        let reference = GhfReference::compile(extract_bogoliubov(&gamma).unwrap(), &DecomposeConfig::default()).unwrap();
        let g = dense_ops(m);
        let u = unitary(&reference.ubog);
        let r = reference.target.rotation.matrix();
        // U g_j U^+ = sum_k R_kj g_k
        for j in 0..2 * m {
            let lhs = &u * &g[j] * u.adjoint();
            let rhs = (0..2 * m).fold(DMatrix::<Complex64>::zeros(1 << m, 1 << m), |acc, k| acc + &g[k] * Complex64::from(r[(k, j)]));
            conj_err = conj_err.max(max_norm(&(lhs - rhs)));
        }
        cov_err = cov_err.max((state_covariance(&g, &reference.state()) - gamma.matrix()).amax());
    }
    outcome(conj_err < 1e-8 && cov_err < 1e-8, format!("conjugation {conj_err:.1e}, state covariance {cov_err:.1e}"))
}

fn c8_decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = DecomposeConfig { warn_tol: 1.0, ..Default::default() };
    let mut pass = true;
    let mut rows = Vec::new();
    for m in 2..=4 {
        let mut ok = 0;
        for _ in 0..100 {
            let mut r = random_orthogonal(2 * m, &mut rng);
            if r.determinant() < 0.0 {
                r.row_mut(0).neg_mut();
            }
            let d = decompose(&OrthogonalTransform::new(r).unwrap(), &cfg).unwrap();
            ok += usize::from(d.overlap >= 1.0 - 1e-8);
        }
        pass &= ok >= 95;
        rows.push(format!("M={m} {ok}/100"));
    }
    outcome(pass, rows.join(", "))
}

fn c9_gradients() -> Outcome {
    let b = bench(hubbard(2, 1, 4.0, 0.0), Some(2.0));
    let a = b.build(&AnsatzRegistry::default(), "ldca-1").unwrap();
    let n = a.num_params();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pi = std::f64::consts::PI;
    let mut fd_err: f64 = 0.0;
    let value = |x: &[f64]| b.objective.evaluate(&a.prepare(x).unwrap()).objective;
    for _ in 0..100 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-pi..pi)).collect();
        let k = rng.random_range(0..n);
        let mut g = vec![0.0; n];
        a.value_and_gradient(&x, &b.objective, &mut g).unwrap();
        let h = 1e-5;
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[k] += h;
        xm[k] -= h;
        let fd = (value(&xp) - value(&xm)) / (2.0 * h);
        fd_err = fd_err.max((g[k] - fd).abs());
    }
    let terms: Vec<_> = b.hamiltonian.terms().into_iter().filter(|t| !t.string().is_identity()).collect();
    let mut anc_err: f64 = 0.0;
    for _ in 0..50 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-pi..pi)).collect();
        let seq = a.circuit(&x).unwrap();
        let sites: Vec<GateSite> = seq
            .layers
            .iter()
            .enumerate()
            .flat_map(|(l, layer)| {
                layer.iter().enumerate().filter(|(_, g)| g.kind.is_rotation()).map(move |(i, _)| GateSite { layer: l, index: i })
            })
            .collect();
        let site = sites[rng.random_range(0..sites.len())];
        let obs = &terms[rng.random_range(0..terms.len())];
        let psi0 = Statevector::zero(b.modes());
        let direct = gradient_direct(&seq, site, obs, &psi0).unwrap();
        let anc = gradient_hadamard_test(&seq, site, obs, &psi0).unwrap();
        anc_err = anc_err.max((direct - anc).abs());
    }
    outcome(fd_err < 1e-5 && anc_err < 1e-9, format!("finite differences {fd_err:.1e}, ancilla vs direct {anc_err:.1e}"))
}

fn c10_formulas() -> Outcome {
    let reg = AnsatzRegistry::default();
    let mut bad = Vec::new();
    let mut checked = 0;
    for m in 1..=10 {
        let reference = GhfReference::compile(BogoliubovTransform::identity(m), &DecomposeConfig::default()).unwrap();
        let c = m.div_ceil(2);
        for l in 0..=3 {
            let name = if l == 0 { "ghf".to_string() } else { format!("ldca-{l}") };
            let a = reg.build(&name, &reference).unwrap();
            let params = 5 * l * (m - 1) * c + m;
            // one extra layer for the measurement basis change
            let depth = a.circuit(&vec![0.0; a.num_params()]).unwrap().depth() + 1;
            if a.num_params() != params || ldca_parameter_count(m, l) != params || depth != (10 * l + 8) * c + 4 {
                bad.push(format!("M={m} L={l}: {} params, depth {depth}", a.num_params()));
            }
            checked += 1;
        }
        if ubog_depth(m) != 8 * c + 1 {
            bad.push(format!("M={m}: U_Bog depth {}", ubog_depth(m)));
        }
    }
    let instances = (ldca_parameter_count(8, 1), ldca_parameter_count(8, 2));
    let pass = bad.is_empty() && instances == (148, 288);
    outcome(pass, format!("{checked} (M, L) pairs, M=8 gives {} and {} [{}]", instances.0, instances.1, bad.join(", ")))
}

fn random_antisymmetric(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &a - a.transpose()
}

/// Dense pure state with covariance `g`: the top eigenvector of
/// `(i/4) sum G_kl g_k g_l`.
fn dense_state(gm: &[DMatrix<Complex64>], g: &CovarianceMatrix) -> DVector<Complex64> {
    let dim = gm[0].nrows();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 0..gm.len() {
        for l in 0..gm.len() {
            h += &gm[k] * &gm[l] * Complex64::new(0.0, 0.25 * g.matrix()[(k, l)]);
        }
    }
    let eig = SymmetricEigen::new(h);
    eig.eigenvectors.column(eig.eigenvalues.imax()).into_owned()
}

fn c11_ghf_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pf_err: f64 = 0.0;
    for n in (2..=10).step_by(2) {
        for _ in 0..20 {
            let a = random_antisymmetric(n, &mut rng);
            let pf = pfaffian(&a).unwrap();
            let det = a.determinant();
            pf_err = pf_err.max((pf * pf - det).abs() / det.abs());
        }
    }

    let h = to_majorana(&hubbard(2, 2, 4.0, 0.0)).unwrap();
    let (mut purity_err, mut rise): (f64, f64) = (0.0, 0.0);
    for (seed, iters) in [(1, 10), (2, 100), (3, 1000), (4, 20_000)] {
        let g0 = starting_point(8, seed, 1);
        let ev = imaginary_time_evolve(&h, &g0, &ImaginaryTimeOptions { max_iters: iters, ..Default::default() }).unwrap();
        purity_err = purity_err.max(ev.gamma.pure_state_error());
        for w in ev.energies.windows(2) {
            rise = rise.max(w[1] - w[0]);
        }
    }

    let mut wick_err: f64 = 0.0;
    let mut sets = 0;
    while sets < 200 {
        let m = 1 + sets % 3;
        let gm: Vec<_> = (0..2 * m).map(|k| fock::majorana_matrix(m, k)).collect();
        let g = CovarianceMatrix::random_pure(m, &mut rng);
        let psi = dense_state(&gm, &g);
        for _ in 0..10 {
            let len = rng.random_range(1..=2 * m);
            let mut pool: Vec<usize> = (0..2 * m).collect();
            let mut idx: Vec<usize> = (0..len).map(|_| pool.swap_remove(rng.random_range(0..pool.len()))).collect();
            idx.sort_unstable();
            let op = idx.iter().fold(DMatrix::<Complex64>::identity(1 << m, 1 << m), |acc, &k| acc * &gm[k]);
            let dense = psi.dotc(&(op * &psi));
            wick_err = wick_err.max((dense - wick_expectation(&g, &idx).unwrap()).norm());
            sets += 1;
        }
    }
    let pass = pf_err < 1e-8 && purity_err < 1e-8 && rise <= 1e-12 && wick_err < 1e-8;
    outcome(
        pass,
        format!("Pf^2 vs det {pf_err:.1e}, purity {purity_err:.1e}, max energy rise {rise:.1e}, Wick ({sets} sets) {wick_err:.1e}"),
    )
}

fn ppp_table() -> PppTable {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ppp_cyclobutadiene.json");
    PppTable::load(path).unwrap()
}

/// Cyclic site shift `s -> s+1 mod n` acting on both spin modes.
fn ring_shift(sites: usize) -> Vec<usize> {
    let mut perm = vec![0; 2 * sites];
    for s in 0..sites {
        for down in [false, true] {
            perm[hubbard_mode(s, down)] = hubbard_mode((s + 1) % sites, down);
        }
    }
    perm
}

fn commutator_norm(p: &PppParams) -> f64 {
    let spec = build_ppp(p).unwrap();
    let h = fock::dense_matrix(&spec.to_operator());
    let perm = fock::mode_permutation(spec.modes, &ring_shift(p.sites())).unwrap();
    max_norm(&(&h * &perm - &perm * &h))
}

/// Square-ring parameters with random nearest-neighbour and diagonal values.
fn random_square(rng: &mut impl Rng) -> PppParams {
    let (t1, t2) = (rng.random_range(-0.15..-0.05), rng.random_range(-0.02..0.0));
    let (r1, u) = (rng.random_range(2.4..3.0), rng.random_range(0.3..0.5));
    let r2 = r1 * std::f64::consts::SQRT_2;
    let nn = |i: usize, j: usize| (i + 4 - j) % 4 == 1 || (j + 4 - i) % 4 == 1;
    PppParams {
        t: (0..4).map(|i| (0..4).map(|j| if i == j { 0.0 } else if nn(i, j) { t1 } else { t2 }).collect()).collect(),
        u: vec![u; 4],
        u_mn: u,
        v_c: rng.random_range(0.0..1.0),
        r: (0..4).map(|i| (0..4).map(|j| if i == j { 0.0 } else if nn(i, j) { r1 } else { r2 }).collect()).collect(),
    }
}

fn c12_ppp() -> Outcome {
    let table = ppp_table();
    let k = table.entries.len();
    let mut pass = true;
    let mut rows = Vec::new();
    for e in [&table.entries[0], &table.entries[k / 2], &table.entries[k - 1]] {
        let b = bench(build_ppp(&e.params).unwrap(), Some(4.0));
        let (_, l2) = ldca_ladder(&b);
        let de = l2.energy - b.exact.energy;
        pass &= de.abs() < 1e-6;
        rows.push(format!("lambda={} dE {de:.1e}", e.lambda));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut sym: f64 = commutator_norm(&table.entries[k / 2].params);
    for _ in 0..5 {
        sym = sym.max(commutator_norm(&random_square(&mut rng)));
    }
    // the distorted endpoint must not commute, or the check says nothing
    let broken = commutator_norm(&table.entries[0].params);
    pass &= sym < 1e-10 && broken > 1e-6;
    rows.push(format!("square [H, P] {sym:.1e}, rectangle [H, P] {broken:.1e}"));
    outcome(pass, rows.join("; "))
}
