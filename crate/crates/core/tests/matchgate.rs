use ldca_core::circuit::GateSequence;
use ldca_core::ghf::{extract_bogoliubov, BogoliubovTransform, CovarianceMatrix};
use ldca_core::jw::majorana_qubit;
use ldca_core::linalg::{random_orthogonal, random_unitary};
use ldca_core::matchgate::*;
use ldca_core::sim::Statevector;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn columns(n: usize, f: impl Fn(Statevector) -> Statevector) -> DMatrix<Complex64> {
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let out = f(Statevector::basis(n, c));
        for (r, a) in out.amplitudes().iter().enumerate() {
            m[(r, c)] = *a;
        }
    }
    m
}

fn unitary(seq: &GateSequence) -> DMatrix<Complex64> {
    columns(seq.qubits, |mut s| {
        s.apply_sequence(seq).unwrap();
        s
    })
}

fn majoranas(m: usize) -> Vec<DMatrix<Complex64>> {
    (0..2 * m)
        .map(|k| {
            let op = majorana_qubit(k, m).unwrap().compile();
            columns(m, |s| s.apply_operator(&op).unwrap())
        })
        .collect()
}

/// `R_kj = tr(g_k U g_j U^+) / 2^M`.
fn realized_rotation(seq: &GateSequence) -> DMatrix<f64> {
    let m = seq.qubits;
    let u = unitary(seq);
    let g = majoranas(m);
    let dim = (1usize << m) as f64;
    DMatrix::from_fn(2 * m, 2 * m, |k, j| {
        let c = (&g[k] * &u * &g[j] * u.adjoint()).trace() / dim;
        assert!(c.im.abs() < 1e-12);
        c.re
    })
}

#[test]
fn circuit_conjugates_majoranas_by_reconstructed_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 2..=4 {
        for _ in 0..3 {
            let a = BogAngleSet::random(m, &mut rng);
            let seq = emit_ubog(&a);
            seq.validate().unwrap();
            let got = realized_rotation(&seq);
            let want = reconstruct(&a);
            let err = (got - want.matrix()).amax();
            assert!(err < 1e-12, "M={m}: {err:.2e}");
        }
    }
}

#[test]
fn circuit_unitary_and_norm_preserving() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let seq = emit_ubog(&BogAngleSet::random(4, &mut rng));
    let u = unitary(&seq);
    let err = (u.adjoint() * &u - DMatrix::identity(16, 16)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(err < 1e-13);
    let mut s = Statevector::basis(4, 5);
    s.apply_sequence(&seq).unwrap();
    assert!((s.norm() - 1.0).abs() < 1e-14);
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = 3;
    let target = random_orthogonal(2 * m, &mut rng);
    let fs = factors(m, false);
    let x = BogAngleSet::random(m, &mut rng).to_vec();
    let mut g = vec![0.0; x.len()];
    overlap_and_gradient(&target, &fs, &x, &mut g);
    let h = 1e-6;
    let mut scratch = vec![0.0; x.len()];
    for i in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let fd = (overlap_and_gradient(&target, &fs, &xp, &mut scratch)
            - overlap_and_gradient(&target, &fs, &xm, &mut scratch))
            / (2.0 * h);
        assert!((fd - g[i]).abs() < 1e-8, "param {i}: {fd} vs {}", g[i]);
    }
}

#[test]
fn decomposes_random_rotations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [2, 3, 4] {
        let mut r = random_orthogonal(2 * m, &mut rng);
        if r.determinant() < 0.0 {
            r.row_mut(0).neg_mut();
        }
        let t = OrthogonalTransform::new(r).unwrap();
        let d = decompose(&t, &DecomposeConfig::default()).unwrap();
        assert!(1.0 - d.overlap < 1e-10, "M={m}: {:.2e}", 1.0 - d.overlap);
        let err = (reconstruct(&d.angles).matrix() - t.matrix()).amax();
        assert!(err < 1e-10, "M={m}: {err:.2e}");
    }
}

#[test]
fn number_conserving_fast_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = 4;
    let u = random_unitary(m, &mut rng);
    let bt = BogoliubovTransform::new(u, DMatrix::zeros(m, m)).unwrap();
    let t = bog_to_orthogonal(&bt).unwrap();
    assert!(!t.odd_parity);
    assert!(is_number_conserving(t.rotation.matrix()));
    let cfg = DecomposeConfig { number_conserving_fast_path: true, ..Default::default() };
    let d = decompose(&t.rotation, &cfg).unwrap();
    assert!(1.0 - d.overlap < 1e-10);
    let seq = emit_ubog(&d.angles);
    if d.angles.number_conserving {
        assert_eq!(seq.depth(), 4 * 2 + 1);
    }
    let got = realized_rotation(&seq);
    assert!((got - t.rotation.matrix()).amax() < 1e-10);
}

#[test]
fn prepared_state_has_target_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = 3;
    for _ in 0..4 {
        let gamma = CovarianceMatrix::random_pure(m, &mut rng);
        let bt = extract_bogoliubov(&gamma).unwrap();
        let t = bog_to_orthogonal(&bt).unwrap();
        let d = decompose(&t.rotation, &DecomposeConfig::default()).unwrap();
        let seq = ghf_state_circuit(&d.angles, t.odd_parity);
        let mut s = Statevector::zero(m);
        s.apply_sequence(&seq).unwrap();
        let g = majoranas(m);
        let amps = nalgebra::DVector::from_column_slice(s.amplitudes());
        for k in 0..2 * m {
            for l in 0..2 * m {
                let comm = &g[k] * &g[l] - &g[l] * &g[k];
                let v = (amps.adjoint() * comm * &amps)[(0, 0)] * Complex64::new(0.0, 0.5);
                assert!((v.re - gamma.matrix()[(k, l)]).abs() < 1e-10, "({k},{l})");
            }
        }
    }
}
