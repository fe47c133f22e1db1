use ldca_core::circuit::{Gate, GateKind, GateSequence};
use ldca_core::ghf::{extract_bogoliubov, CovarianceMatrix};
use ldca_core::jw::hamiltonian_to_qubits;
use ldca_core::fermion::{build_hubbard, HubbardParams};
use ldca_core::matchgate::DecomposeConfig;
use ldca_core::pauli::{Axis, PauliString};
use ldca_core::sim::{gate_derivative, gradient_direct, gradient_hadamard_test, GateSite, Statevector};
use ldca_core::vqe::{Ansatz, GhfReference, LdcaAnsatz};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `exp(i s t P) = cos t + i s sin t P` since `P^2 = 1`.
fn dense_gate(g: &Gate, n: usize) -> DMatrix<Complex64> {
    let (s, p) = g.pauli();
    let pd = p.to_dense(n);
    if !g.kind.is_rotation() {
        return pd;
    }
    let id = DMatrix::<Complex64>::identity(1 << n, 1 << n);
    id * Complex64::from(g.theta.cos()) + pd * Complex64::new(0.0, s * g.theta.sin())
}

fn random_sequence(n: usize, len: usize, rng: &mut impl Rng) -> GateSequence {
    let mut seq = GateSequence::new(n);
    for _ in 0..len {
        let kind = GateKind::ALL[rng.random_range(0..GateKind::ALL.len())];
        let theta = rng.random_range(-3.0..3.0);
        let g = if kind.arity() == 1 {
            Gate::new(kind, &[rng.random_range(0..n)], if kind.is_rotation() { theta } else { 0.0 })
        } else {
            let i = rng.random_range(0..n - 1);
            if rng.random_bool(0.5) {
                Gate::two(kind, i, i + 1, theta)
            } else {
                Gate::two(kind, i + 1, i, theta)
            }
        };
        seq.push_layer(vec![g]);
    }
    seq
}

fn random_state(n: usize, rng: &mut impl Rng) -> Statevector {
    let amps: Vec<Complex64> = (0..1 << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let mut s = Statevector::from_amplitudes(amps).unwrap_or_else(|_| Statevector::zero(n));
    s.normalize();
    s
}

#[test]
fn gates_match_dense_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 4;
    for _ in 0..20 {
        let seq = random_sequence(n, 12, &mut rng);
        let psi = random_state(n, &mut rng);
        let mut dense = DVector::from_column_slice(psi.amplitudes());
        for g in seq.gates() {
            dense = dense_gate(g, n) * dense;
        }
        let mut s = psi.clone();
        s.apply_sequence(&seq).unwrap();
        let err = s.amplitudes().iter().zip(dense.iter()).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));
        assert!(err < 1e-12, "{err}");
    }
}

#[test]
fn qubit_zero_is_the_most_significant_bit() {
    let mut s = Statevector::zero(3);
    s.apply_gate(&Gate::x(0)).unwrap();
    assert!((s.amplitudes()[0b100].norm() - 1.0).abs() < 1e-15);
    let z0 = PauliString::single(0, Axis::Z);
    let z2 = PauliString::single(2, Axis::Z);
    assert!((s.pauli_overlap(&z0, &s).unwrap().re + 1.0).abs() < 1e-15);
    assert!((s.pauli_overlap(&z2, &s).unwrap().re - 1.0).abs() < 1e-15);
    assert_eq!(Statevector::basis(3, 1).amplitudes()[1], Complex64::new(1.0, 0.0));
}

#[test]
fn pauli_overlap_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 3;
    let axes = [Axis::X, Axis::Y, Axis::Z];
    for _ in 0..20 {
        let (a, b) = (random_state(n, &mut rng), random_state(n, &mut rng));
        let word: Vec<(usize, Axis)> = (0..n).map(|q| (q, axes[rng.random_range(0..3)])).collect();
        let p = PauliString::from_word(&word);
        let dense = DVector::from_column_slice(a.amplitudes()).dotc(&(p.to_dense(n) * DVector::from_column_slice(b.amplitudes())));
        assert!((a.pauli_overlap(&p, &b).unwrap() - dense).norm() < 1e-12);
    }
}

#[test]
fn ancilla_circuit_matches_direct_gradient_on_ldca() {
    let m = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gamma = CovarianceMatrix::random_pure(m, &mut rng);
    let reference = GhfReference::compile(extract_bogoliubov(&gamma).unwrap(), &DecomposeConfig::default()).unwrap();
    let ansatz = LdcaAnsatz::new(&reference, 1);
    let h = hamiltonian_to_qubits(&build_hubbard(&HubbardParams { nx: 2, ny: 1, t: 1.0, u: 4.0, mu: 0.0, delta: 0.0 }).unwrap()).unwrap();
    let terms: Vec<_> = h.terms().into_iter().filter(|t| !t.string().is_identity()).collect();
    let compiled = h.compile();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x: Vec<f64> = (0..ansatz.num_params()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let seq = ansatz.circuit(&x).unwrap();
        let rotations: Vec<(usize, usize)> = seq
            .layers
            .iter()
            .enumerate()
            .flat_map(|(l, layer)| layer.iter().enumerate().filter(|(_, g)| g.kind.is_rotation()).map(move |(i, _)| (l, i)))
            .collect();
        let (layer, index) = rotations[rng.random_range(0..rotations.len())];
        let site = GateSite { layer, index };
        let psi0 = Statevector::zero(m);
        let obs = &terms[rng.random_range(0..terms.len())];
        let a = gradient_direct(&seq, site, obs, &psi0).unwrap();
        let b = gradient_hadamard_test(&seq, site, obs, &psi0).unwrap();
        worst = worst.max((a - b).abs());
        // full operator derivative against central differences
        let d = gate_derivative(&seq, site, &compiled, &psi0).unwrap();
        let energy = |t: f64| {
            let mut s = seq.clone();
            s.layers[layer][index].theta += t;
            let mut psi = psi0.clone();
            psi.apply_sequence(&s).unwrap();
            psi.expectation(&h).unwrap()
        };
        let fd = (energy(1e-5) - energy(-1e-5)) / 2e-5;
        assert!((d - fd).abs() < 1e-6, "{d} vs {fd}");
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn dump_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = random_state(3, &mut rng);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("psi.bin");
    s.dump(&p).unwrap();
    assert_eq!(Statevector::load_dump(&p).unwrap(), s);
}

proptest! {
    #[test]
    fn sequences_are_unitary_and_invertible(seed in any::<u64>(), len in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = random_sequence(3, len, &mut rng);
        let psi = random_state(3, &mut rng);
        let mut s = psi.clone();
        s.apply_sequence(&seq).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        s.apply_sequence(&seq.inverse()).unwrap();
        prop_assert!((s.inner(&psi).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}
