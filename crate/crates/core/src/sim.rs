//! Dense statevector simulator. Qubit 0 is the most significant bit of the
//! amplitude index.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::circuit::{Gate, GateKind, GateSequence};
use crate::error::{Error, Result};
use crate::pauli::{i_pow, CompiledOperator, PauliString, PauliTerm, QubitOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const MAX_QUBITS: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    qubits: usize,
    amps: Vec<Complex64>,
}

#[inline]
fn parity_sign(mask: usize) -> f64 {
    if mask.count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

impl Statevector {
    /// `|0...0>`, which holds every mode occupied.
    pub fn zero(qubits: usize) -> Self {
        Self::basis(qubits, 0)
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        assert!(qubits <= MAX_QUBITS, "register too large");
        let mut amps = vec![ZERO; 1 << qubits];
        amps[index] = ONE;
        Self { qubits, amps }
    }

    /// `|1...1>`, the Fock vacuum.
    pub fn vacuum(qubits: usize) -> Self {
        Self::basis(qubits, (1 << qubits) - 1)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::invalid("amplitude count must be a power of two"));
        }
        let qubits = len.trailing_zeros() as usize;
        let s = Self { qubits, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state is not normalized (norm {norm})")));
        }
        Ok(s)
    }

    /// Unnormalized vector, for adjoint states in gradient code.
    pub(crate) fn from_raw(amps: Vec<Complex64>) -> Self {
        debug_assert!(amps.len().is_power_of_two());
        Self { qubits: amps.len().trailing_zeros() as usize, amps }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.qubits != other.qubits {
            return Err(Error::DimensionMismatch { expected: self.qubits, found: other.qubits });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    fn masks(&self, p: &PauliString) -> Result<(usize, usize, Complex64)> {
        if let Some(q) = p.max_qubit() {
            if q >= self.qubits {
                return Err(Error::IndexOutOfRange { index: q, len: self.qubits });
            }
        }
        let (xi, zi) = p.index_masks(self.qubits);
        Ok((xi, zi, i_pow(p.y_count())))
    }

    /// `exp(i theta P)` restricted to amplitudes whose index contains all
    /// bits of `control`.
    fn rotate_masks(&mut self, xi: usize, zi: usize, ph: Complex64, theta: f64, control: usize) {
        let (s, c) = theta.sin_cos();
        let is = Complex64::new(0.0, s);
        if xi == 0 {
            let plus = c + is * ph;
            let minus = c - is * ph;
            for (b, a) in self.amps.iter_mut().enumerate() {
                if b & control == control {
                    *a *= if parity_sign(zi & b) > 0.0 { plus } else { minus };
                }
            }
            return;
        }
        let high = 1usize << (usize::BITS - 1 - xi.leading_zeros());
        for b in 0..self.amps.len() {
            if b & high != 0 || b & control != control {
                continue;
            }
            let b2 = b ^ xi;
            let (a1, a2) = (self.amps[b], self.amps[b2]);
            let p1 = ph * parity_sign(zi & b2);
            let p2 = ph * parity_sign(zi & b);
            self.amps[b] = a1 * c + is * p1 * a2;
            self.amps[b2] = a2 * c + is * p2 * a1;
        }
    }

    fn pauli_masks(&mut self, xi: usize, zi: usize, ph: Complex64, control: usize) {
        if xi == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                if b & control == control {
                    *a *= ph * parity_sign(zi & b);
                }
            }
            return;
        }
        let high = 1usize << (usize::BITS - 1 - xi.leading_zeros());
        for b in 0..self.amps.len() {
            if b & high != 0 || b & control != control {
                continue;
            }
            let b2 = b ^ xi;
            let (a1, a2) = (self.amps[b], self.amps[b2]);
            self.amps[b] = ph * parity_sign(zi & b2) * a2;
            self.amps[b2] = ph * parity_sign(zi & b) * a1;
        }
    }

    /// `<self| P |other>` without allocating.
    pub fn pauli_overlap(&self, p: &PauliString, other: &Statevector) -> Result<Complex64> {
        if other.qubits != self.qubits {
            return Err(Error::DimensionMismatch { expected: self.qubits, found: other.qubits });
        }
        let (xi, zi, ph) = self.masks(p)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in other.amps.iter().enumerate() {
            acc += self.amps[b ^ xi].conj() * *a * parity_sign(zi & b);
        }
        Ok(acc * ph)
    }

    /// `exp(i theta P)`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        let (xi, zi, ph) = self.masks(p)?;
        self.rotate_masks(xi, zi, ph, theta, 0);
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        let (xi, zi, ph) = self.masks(p)?;
        self.pauli_masks(xi, zi, ph, 0);
        Ok(())
    }

    fn control_mask(&self, control: usize) -> Result<usize> {
        if control >= self.qubits {
            return Err(Error::IndexOutOfRange { index: control, len: self.qubits });
        }
        Ok(1 << (self.qubits - 1 - control))
    }

    /// Applies `P` when qubit `control` is `|1>`, as a chain of controlled
    /// single-qubit Paulis.
    pub fn apply_controlled_pauli(&mut self, p: &PauliString, control: usize) -> Result<()> {
        let cm = self.control_mask(control)?;
        if p.axis(control).is_some() {
            return Err(Error::invalid("control qubit inside the Pauli support"));
        }
        for (q, axis) in p.word() {
            let single = PauliString::single(q, axis);
            let (xi, zi, ph) = self.masks(&single)?;
            self.pauli_masks(xi, zi, ph, cm);
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        let (sign, p) = g.pauli();
        match g.kind {
            GateKind::X => self.apply_pauli(&p),
            _ => self.apply_pauli_rotation(&p, sign * g.theta),
        }
    }

    pub fn apply_sequence(&mut self, seq: &GateSequence) -> Result<()> {
        if seq.qubits > self.qubits {
            return Err(Error::DimensionMismatch { expected: self.qubits, found: seq.qubits });
        }
        for g in seq.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn apply_operator(&self, op: &CompiledOperator) -> Result<Statevector> {
        if op.num_qubits() != self.qubits {
            return Err(Error::DimensionMismatch { expected: self.qubits, found: op.num_qubits() });
        }
        Ok(Statevector { qubits: self.qubits, amps: op.apply_vec(&self.amps) })
    }

    /// `<psi|O|psi>` for Hermitian `O`.
    pub fn expectation(&self, op: &QubitOperator) -> Result<f64> {
        let err = op.hermiticity_error();
        if err > 1e-10 {
            return Err(Error::NotHermitian(err));
        }
        if op.num_qubits() != self.qubits {
            return Err(Error::DimensionMismatch { expected: self.qubits, found: op.num_qubits() });
        }
        Ok(op.compile().expectation(&self.amps).re)
    }

    pub fn expectation_compiled(&self, op: &CompiledOperator) -> Complex64 {
        op.expectation(&self.amps)
    }

    /// Appends a qubit in `|+>` as the least significant (last) qubit.
    pub fn with_plus_ancilla(&self) -> Statevector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = Vec::with_capacity(2 * self.amps.len());
        for a in &self.amps {
            amps.push(a * h);
            amps.push(a * h);
        }
        Statevector { qubits: self.qubits + 1, amps }
    }

    /// Raw dump, interleaved little-endian `f64` pairs.
    pub fn dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for a in &self.amps {
            f.write_all(&a.re.to_le_bytes())?;
            f.write_all(&a.im.to_le_bytes())?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn load_dump(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.len() % 16 != 0 {
            return Err(Error::invalid("dump length is not a multiple of 16 bytes"));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(amps)
    }
}

/// `|<psi|phi>|^2`.
pub fn fidelity(psi: &Statevector, phi: &Statevector) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr())
}

/// Weight of `psi` inside the span of orthonormal `basis`.
pub fn subspace_fidelity(psi: &Statevector, basis: &[Statevector]) -> Result<f64> {
    let mut w = 0.0;
    for b in basis {
        w += b.inner(psi)?.norm_sqr();
    }
    Ok(w)
}

/// Position of a gate: layer index and index within the layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GateSite {
    pub layer: usize,
    pub index: usize,
}

fn site_gate(seq: &GateSequence, site: GateSite) -> Result<&Gate> {
    seq.layers
        .get(site.layer)
        .and_then(|l| l.get(site.index))
        .filter(|g| g.kind.is_rotation())
        .ok_or_else(|| Error::invalid(format!("no rotation gate at layer {} index {}", site.layer, site.index)))
}

/// Runs `seq` on `psi`, calling `insert` right after the gate at `site`.
fn run_with_insertion(
    seq: &GateSequence,
    psi: &mut Statevector,
    site: GateSite,
    mut insert: impl FnMut(&mut Statevector) -> Result<()>,
) -> Result<()> {
    for (l, layer) in seq.layers.iter().enumerate() {
        for (i, g) in layer.iter().enumerate() {
            psi.apply_gate(g)?;
            if l == site.layer && i == site.index {
                insert(psi)?;
            }
        }
    }
    Ok(())
}

/// `2 Im <F0| V^+ O U |F0>` from two plain simulations, where `V` is `U`
/// with the gate generator at `site` inserted after that gate.
pub fn gradient_direct(seq: &GateSequence, site: GateSite, obs: &PauliTerm, psi0: &Statevector) -> Result<f64> {
    let g = site_gate(seq, site)?;
    let (_, p) = g.pauli();
    let mut u = psi0.clone();
    u.apply_sequence(seq)?;
    let mut v = psi0.clone();
    run_with_insertion(seq, &mut v, site, |s| s.apply_pauli(&p))?;
    let mut ou = u.clone();
    ou.apply_pauli(&obs.string())?;
    Ok(2.0 * (v.inner(&ou)? * obs.coefficient).im)
}

/// The same quantity as [`gradient_direct`] from the ancilla circuit: the
/// ancilla starts in `|+>`, the generator is inserted controlled on
/// ancilla `|0>`, the observable is applied controlled on `|1>`, and the
/// result is `2 <Y_anc>`.
pub fn gradient_hadamard_test(seq: &GateSequence, site: GateSite, obs: &PauliTerm, psi0: &Statevector) -> Result<f64> {
    let g = site_gate(seq, site)?;
    let (_, p) = g.pauli();
    if obs.coefficient.im.abs() > 1e-14 {
        return Err(Error::NotHermitian(obs.coefficient.im.abs()));
    }
    let anc = psi0.qubits();
    let flip = PauliString::single(anc, crate::pauli::Axis::X);
    let mut psi = psi0.with_plus_ancilla();
    run_with_insertion(seq, &mut psi, site, |s| {
        s.apply_pauli(&flip)?;
        s.apply_controlled_pauli(&p, anc)?;
        s.apply_pauli(&flip)
    })?;
    psi.apply_controlled_pauli(&obs.string(), anc)?;
    let y = QubitOperator::term(anc + 1, PauliString::single(anc, crate::pauli::Axis::Y), ONE);
    Ok(2.0 * obs.coefficient.re * psi.expectation(&y)?)
}

/// `d <O> / d theta` of the gate at `site`, for a full Hermitian operator.
pub fn gate_derivative(seq: &GateSequence, site: GateSite, op: &CompiledOperator, psi0: &Statevector) -> Result<f64> {
    let g = site_gate(seq, site)?;
    let (sign, p) = g.pauli();
    let mut u = psi0.clone();
    u.apply_sequence(seq)?;
    let mut v = psi0.clone();
    run_with_insertion(seq, &mut v, site, |s| s.apply_pauli(&p))?;
    let ou = u.apply_operator(op)?;
    Ok(sign * 2.0 * v.inner(&ou)?.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Axis;

    #[test]
    fn x_layer_prepares_all_ones() {
        let mut s = Statevector::zero(3);
        let mut seq = GateSequence::new(3);
        seq.push_layer(GateSequence::x_layer(3, &[]));
        s.apply_sequence(&seq).unwrap();
        assert_eq!(s, Statevector::vacuum(3));
    }

    #[test]
    fn rzz_phase_on_zero_state() {
        let mut s = Statevector::zero(2);
        s.apply_gate(&Gate::two(GateKind::Rzz, 0, 1, 0.3)).unwrap();
        assert!((s.amplitudes()[0] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn rotation_angles_add() {
        let mut a = Statevector::basis(2, 1);
        let mut b = a.clone();
        for _ in 0..2 {
            a.apply_gate(&Gate::two(GateKind::Rxx, 0, 1, std::f64::consts::FRAC_PI_2)).unwrap();
        }
        b.apply_gate(&Gate::two(GateKind::Rxx, 0, 1, std::f64::consts::PI)).unwrap();
        assert!(fidelity(&a, &b).unwrap() > 1.0 - 1e-14);
    }

    #[test]
    fn single_qubit_gradient_toy() {
        // exp(i t X)|0>, <Z> = cos 2t
        let t = std::f64::consts::PI / 8.0;
        let mut seq = GateSequence::new(2);
        seq.push_layer(vec![Gate::two(GateKind::Rxx, 0, 1, t)]);
        // on |00>, exp(i t XX) acts like exp(i t X) on qubit 0 for <Z_0>
        let obs = PauliTerm::new(ONE, vec![(0, Axis::Z)]).unwrap();
        let site = GateSite { layer: 0, index: 0 };
        let psi0 = Statevector::zero(2);
        let expect = -2.0 * (std::f64::consts::PI / 4.0).sin();
        assert!((gradient_direct(&seq, site, &obs, &psi0).unwrap() - expect).abs() < 1e-12);
        assert!((gradient_hadamard_test(&seq, site, &obs, &psi0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let op = QubitOperator::term(1, PauliString::single(0, Axis::Z), Complex64::new(0.0, 1.0));
        assert!(Statevector::zero(1).expectation(&op).is_err());
        let z = QubitOperator::term(1, PauliString::single(0, Axis::Z), ONE);
        assert_eq!(Statevector::zero(1).expectation(&z).unwrap(), 1.0);
    }

    #[test]
    fn fidelity_of_basis_states() {
        let a = Statevector::basis(2, 1);
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &Statevector::basis(2, 2)).unwrap(), 0.0);
        assert!(fidelity(&a, &Statevector::zero(3)).is_err());
    }

    #[test]
    fn out_of_range_gate() {
        let mut s = Statevector::zero(2);
        assert!(s.apply_gate(&Gate::rz(2, 0.1)).is_err());
    }
}
