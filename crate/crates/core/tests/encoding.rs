use ldca_core::fermion::{build_hubbard, FermionOperator, HamiltonianSpec, HubbardParams, LadderOp};
use ldca_core::fock;
use ldca_core::jw;
use ldca_core::majorana::to_majorana;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn dist(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
}

#[test]
fn ladder_images_match_occupation_basis() {
    let m = 4;
    for p in 0..m {
        for op in [LadderOp::create(p), LadderOp::annihilate(p)] {
            let q = jw::ladder_qubit(op, m).unwrap().to_dense();
            assert!(dist(&q, &fock::ladder_matrix(m, op)) < 1e-14, "{op:?}");
        }
    }
    for k in 0..2 * m {
        let q = jw::majorana_qubit(k, m).unwrap().to_dense();
        assert!(dist(&q, &fock::majorana_matrix(m, k)) < 1e-14, "majorana {k}");
    }
}

#[test]
fn vacuum_has_no_particles() {
    let m = 3;
    let n = jw::number_operator(m).to_dense();
    let vac = fock::vacuum(m);
    assert!((vac.dotc(&(&n * &vac))).norm() < 1e-14);
    // |0...0> holds every mode
    let mut full = nalgebra::DVector::<Complex64>::zeros(1 << m);
    full[0] = c(1.0, 0.0);
    assert!((full.dotc(&(&n * &full)) - c(m as f64, 0.0)).norm() < 1e-14);
}

#[test]
fn hubbard_dimer_with_pairing_matches() {
    let spec = build_hubbard(&HubbardParams { nx: 2, ny: 1, t: 1.0, u: 3.0, mu: 0.4, delta: 0.7 }).unwrap();
    let q = jw::hamiltonian_to_qubits(&spec).unwrap();
    assert!(q.is_hermitian(1e-14));
    let f = fock::dense_matrix(&spec.to_operator());
    assert!(dist(&q.to_dense(), &f) < 1e-13);
}

fn majorana_dense(spec: &HamiltonianSpec) -> DMatrix<Complex64> {
    let h = to_majorana(spec).unwrap();
    let m = spec.modes;
    let n = 2 * m;
    let g: Vec<_> = (0..n).map(|k| fock::majorana_matrix(m, k)).collect();
    let dim = 1 << m;
    let mut out = DMatrix::<Complex64>::identity(dim, dim) * c(h.offset, 0.0);
    for a in 0..n {
        for b in 0..n {
            if h.t[(a, b)] != 0.0 {
                out += &g[a] * &g[b] * c(0.0, h.t[(a, b)]);
            }
        }
    }
    let v = h.v_dense();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let x = v[((p * n + q) * n + r) * n + s];
                    if x != 0.0 {
                        out += &g[p] * &g[q] * &g[s] * &g[r] * c(x, 0.0);
                    }
                }
            }
        }
    }
    out
}

#[test]
fn majorana_form_reconstructs_hubbard() {
    let spec = build_hubbard(&HubbardParams { nx: 2, ny: 1, t: 1.0, u: -2.5, mu: 0.3, delta: 0.5 }).unwrap();
    let f = fock::dense_matrix(&spec.to_operator());
    assert!(dist(&majorana_dense(&spec), &f) < 1e-12);
}

fn arb_spec(m: usize) -> impl Strategy<Value = HamiltonianSpec> {
    let n1 = m * m;
    (
        -1.0..1.0f64,
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n1),
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n1),
        prop::collection::vec((0..m, 0..m, 0..m, 0..m, -1.0..1.0f64, -1.0..1.0f64), 0..6),
    )
        .prop_map(move |(k, one, pair, two)| {
            let mut s = HamiltonianSpec::new(m);
            s.constant = k;
            for p in 0..m {
                for q in p..m {
                    let (re, im) = one[p * m + q];
                    let im = if p == q { 0.0 } else { im };
                    s.add_hermitian_one_body(p, q, c(re, im)).unwrap();
                    if p != q {
                        let (re, im) = pair[p * m + q];
                        s.add_pairing(p, q, c(re, im)).unwrap();
                    }
                }
            }
            for (p, q, r, t, re, im) in two {
                if p == q || r == t {
                    continue;
                }
                // add a Hermitian pair
                let z = c(re, im);
                s.add_two_body(p, q, r, t, z).unwrap();
                s.add_two_body(t, r, q, p, z.conj()).unwrap();
            }
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn qubit_encoding_agrees_with_occupation_basis(spec in arb_spec(3)) {
        let op = spec.to_operator();
        let q = jw::operator_to_qubits(&op).unwrap();
        prop_assert!(dist(&q.to_dense(), &fock::dense_matrix(&op)) < 1e-12);
    }

    #[test]
    fn majorana_form_reconstructs(spec in arb_spec(3)) {
        prop_assert!(spec.validate().is_ok());
        let f = fock::dense_matrix(&spec.to_operator());
        prop_assert!(dist(&majorana_dense(&spec), &f) < 1e-12);
    }

    #[test]
    fn json_round_trip(spec in arb_spec(3)) {
        let op = spec.to_operator();
        let back = FermionOperator::from_json(&op.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, op);
    }
}
