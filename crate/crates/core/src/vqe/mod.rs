//! Variational states on top of a compiled GHF reference and their
//! optimization under a particle-number penalty.

mod bucc;
mod ldca;
mod optimize;
mod registry;

pub use bucc::{bucc_generator_count, bucc_state, BuccAnsatz, BuccOrder, BuccParams};
pub use ldca::{ldca_depth, ldca_parameter_count, ldca_sequence, prepare_ldca, LdcaAnsatz, LdcaParams, KGATE_ORDER};
pub use optimize::{optimize, optimize_ladder, warm_start, RestartSummary, VqeOptions, VqeResult};
pub use registry::{Ansatz, AnsatzFactory, AnsatzRegistry};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Gate, GateSequence};
use crate::error::{Error, Result};
use crate::ghf::{extract_bogoliubov, BogoliubovTransform, CovarianceMatrix};
use crate::linalg::random_unitary;
use crate::matchgate::{bog_to_orthogonal, decompose, emit_ubog, BogAngleSet, CircuitTarget, DecomposeConfig};
use crate::pauli::{CompiledOperator, QubitOperator};
use crate::sim::Statevector;

/// A GHF state compiled to `U_Bog^+ X..X |0..0>`.
#[derive(Clone, Debug)]
pub struct GhfReference {
    pub bogoliubov: BogoliubovTransform,
    pub target: CircuitTarget,
    pub angles: BogAngleSet,
    /// `Phi` reached by the decomposition.
    pub overlap: f64,
    pub ubog: GateSequence,
}

impl GhfReference {
    /// Compiles the reference circuit. The vacuum does not change under
    /// `(U, V) -> (U W, V W)` for unitary `W`, so when a target resists the
    /// decomposition a few random gauges are tried before giving up.
    pub fn compile(bogoliubov: BogoliubovTransform, cfg: &DecomposeConfig) -> Result<Self> {
        let mut last = None;
        for attempt in 0..=cfg.gauge_retries {
            let bt = if attempt == 0 {
                bogoliubov.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(attempt as u64);
                let w = random_unitary(bogoliubov.modes(), &mut rng);
                BogoliubovTransform::new(&bogoliubov.u * &w, &bogoliubov.v * &w)?
            };
            let target = bog_to_orthogonal(&bt)?;
            match decompose(&target.rotation, cfg) {
                Ok(d) => {
                    if attempt > 0 {
                        log::info!("reference compiled after {attempt} gauge change(s)");
                    }
                    let ubog = emit_ubog(&d.angles);
                    return Ok(Self { bogoliubov: bt, target, angles: d.angles, overlap: d.overlap, ubog });
                }
                Err(e) => {
                    log::debug!("gauge {attempt}: {e}");
                    last = Some(e);
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }

    pub fn from_covariance(gamma: &CovarianceMatrix, cfg: &DecomposeConfig) -> Result<Self> {
        Self::compile(extract_bogoliubov(gamma)?, cfg)
    }

    pub fn modes(&self) -> usize {
        self.bogoliubov.modes()
    }

    /// X layer; an odd-parity reference keeps the last mode occupied.
    pub fn prep_layer(&self) -> Vec<Gate> {
        let m = self.modes();
        let skip: Vec<usize> = if self.target.odd_parity { vec![m - 1] } else { vec![] };
        GateSequence::x_layer(m, &skip)
    }

    /// The state the X layer prepares, the quasiparticle vacuum in the
    /// circuit frame.
    pub fn frame_vacuum(&self) -> Statevector {
        let mut s = Statevector::zero(self.modes());
        for g in self.prep_layer() {
            s.apply_gate(&g).expect("in range");
        }
        s
    }

    pub fn unprepare(&self) -> GateSequence {
        self.ubog.inverse()
    }

    pub fn state(&self) -> Statevector {
        let mut s = self.frame_vacuum();
        s.apply_sequence(&self.unprepare()).expect("in range");
        s
    }
}

/// `<H> + mu (<N> - n)^2`.
#[derive(Clone, Debug)]
pub struct Objective {
    pub hamiltonian: CompiledOperator,
    pub number: CompiledOperator,
    pub n_target: f64,
    pub penalty: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ObjectiveValue {
    pub objective: f64,
    pub energy: f64,
    pub number: f64,
}

impl Objective {
    pub fn new(h: &QubitOperator, n: &QubitOperator, n_target: f64, penalty: f64) -> Result<Self> {
        if !(penalty >= 0.0) {
            return Err(Error::invalid("penalty must be non-negative"));
        }
        for (name, op) in [("Hamiltonian", h), ("number operator", n)] {
            if !op.is_hermitian(1e-10) {
                return Err(Error::invalid(format!("{name} is not Hermitian")));
            }
        }
        if h.num_qubits() != n.num_qubits() {
            return Err(Error::DimensionMismatch { expected: h.num_qubits(), found: n.num_qubits() });
        }
        Ok(Self { hamiltonian: h.compile(), number: n.compile(), n_target, penalty })
    }

    pub fn evaluate(&self, psi: &Statevector) -> ObjectiveValue {
        let energy = self.hamiltonian.expectation(psi.amplitudes()).re;
        let number = self.number.expectation(psi.amplitudes()).re;
        let dn = number - self.n_target;
        ObjectiveValue { objective: energy + self.penalty * dn * dn, energy, number }
    }

    /// Value and `O_eff |psi>` with `O_eff = H + 2 mu (<N> - n) N`, whose
    /// expectation derivative is the objective derivative.
    pub fn value_and_adjoint(&self, psi: &Statevector) -> Result<(ObjectiveValue, Statevector)> {
        let v = self.evaluate(psi);
        let mut out = self.hamiltonian.apply_vec(psi.amplitudes());
        let c = 2.0 * self.penalty * (v.number - self.n_target);
        if c != 0.0 {
            let nv = self.number.apply_vec(psi.amplitudes());
            out.iter_mut().zip(nv).for_each(|(o, x)| *o += x * c);
        }
        Ok((v, Statevector::from_raw(out)))
    }
}
