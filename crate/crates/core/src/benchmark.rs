//! One benchmark problem end to end: GHF reference, compiled circuit,
//! penalized objective and exact ground state.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{exact_ground_cached, Sector, SpectrumResult};
use crate::fermion::HamiltonianSpec;
use crate::ghf::{solve_ghf, GhfOptions, GhfResult};
use crate::jw::{hamiltonian_to_qubits, number_operator};
use crate::majorana::to_majorana;
use crate::matchgate::DecomposeConfig;
use crate::pauli::QubitOperator;
use crate::vqe::{optimize, Ansatz, AnsatzRegistry, GhfReference, Objective, VqeOptions, VqeResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub ghf: GhfOptions,
    pub decompose: DecomposeConfig,
    /// Particle-number target; `None` turns the penalty off.
    pub n_target: Option<f64>,
    pub penalty: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self { ghf: GhfOptions::default(), decompose: DecomposeConfig::default(), n_target: None, penalty: 10.0 }
    }
}

pub struct Benchmark {
    pub spec: HamiltonianSpec,
    pub hamiltonian: QubitOperator,
    pub ghf: GhfResult,
    pub reference: GhfReference,
    pub objective: Objective,
    pub exact: SpectrumResult,
}

impl Benchmark {
    pub fn new(spec: HamiltonianSpec, cfg: &BenchmarkConfig) -> Result<Self> {
        let hamiltonian = hamiltonian_to_qubits(&spec)?;
        let ghf = solve_ghf(&to_majorana(&spec)?, &cfg.ghf)?;
        let reference = GhfReference::from_covariance(&ghf.gamma, &cfg.decompose)?;
        let (n_target, penalty) = match cfg.n_target {
            Some(n) => (n, cfg.penalty),
            None => (0.0, 0.0),
        };
        let objective = Objective::new(&hamiltonian, &number_operator(spec.modes), n_target, penalty)?;
        let sector = match cfg.n_target {
            Some(n) if spec.conserves_number() && n.fract() == 0.0 && n >= 0.0 => Sector::Particles(n as usize),
            _ => Sector::Full,
        };
        let exact = exact_ground_cached(&spec, sector)?;
        Ok(Self { spec, hamiltonian, ghf, reference, objective, exact })
    }

    pub fn modes(&self) -> usize {
        self.spec.modes
    }

    pub fn build(&self, registry: &AnsatzRegistry, name: &str) -> Result<Box<dyn Ansatz>> {
        registry.build(name, &self.reference)
    }

    /// Optimizes `ansatz` and fills in the fidelity against the exact
    /// ground manifold.
    pub fn run(&self, ansatz: &dyn Ansatz, init: Option<&[f64]>, opts: &VqeOptions) -> Result<VqeResult> {
        let mut r = optimize(ansatz, &self.objective, init, opts)?;
        r.fidelity = Some(self.exact.fidelity(&ansatz.prepare(&r.params)?)?);
        Ok(r)
    }

    /// Fidelity of the compiled GHF circuit state.
    pub fn ghf_fidelity(&self) -> Result<f64> {
        self.exact.fidelity(&self.reference.state())
    }
}
