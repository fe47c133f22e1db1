//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ldca_core::fermion::{build_hubbard, build_ppp, FermionOperator, HamiltonianSpec, HubbardParams, PppTable};
use ldca_core::ghf::GhfOptions;
use ldca_core::matchgate::DecomposeConfig;
use ldca_core::vqe::{AnsatzRegistry, VqeOptions};
use serde::{Deserialize, Serialize};

pub const DEFAULT_U_SWEEP: [f64; 6] = [0.0, 1.0, 2.0, 4.0, 6.0, 8.0];
pub const DEFAULT_DELTA_SWEEP: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];

/// 0.043 eV, the chemical accuracy line drawn on PPP plots.
pub const CHEMICAL_ACCURACY_EV: f64 = 0.043;
const HARTREE_EV: f64 = 27.211386245988;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Model {
    Hubbard(HubbardParams),
    /// Per-lambda PPP table; the sweep runs over `lambda`.
    Ppp { table: PathBuf },
    /// A fermion operator JSON file.
    Operator { path: PathBuf },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    /// Omitted values fall back to the default grid of the parameter.
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub model: Model,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default = "default_ansatz")]
    pub ansatz: Vec<String>,
    #[serde(default)]
    pub optimizer: VqeOptions,
    /// Particle-number target of the penalty, used at points whose
    /// Hamiltonian conserves number.
    #[serde(default)]
    pub n_target: Option<f64>,
    #[serde(default = "default_penalty")]
    pub penalty: f64,
    #[serde(default)]
    pub ghf: GhfOptions,
    #[serde(default)]
    pub decompose: DecomposeConfig,
    #[serde(default)]
    pub seed: u64,
    /// Horizontal reference line on the energy-error plot.
    #[serde(default)]
    pub accuracy_line: Option<f64>,
    #[serde(default)]
    pub gradcheck: GradcheckConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckConfig {
    pub ansatz: String,
    /// Random (point, parameter) pairs for the finite-difference check.
    pub samples: usize,
    /// Random gate sites for the ancilla-circuit check.
    pub sites: usize,
    pub step: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self { ansatz: "ldca-1".into(), samples: 100, sites: 50, step: 1e-5 }
    }
}

fn default_ansatz() -> Vec<String> {
    vec!["ghf".into(), "ldca-1".into()]
}

fn default_penalty() -> f64 {
    10.0
}

/// One point of a sweep.
pub struct Point {
    /// Empty without a sweep.
    pub label: String,
    pub spec: HamiltonianSpec,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let registry = AnsatzRegistry::default();
        for name in self.ansatz.iter().chain([&self.gradcheck.ansatz]) {
            if !registry.contains(name) {
                bail!("unknown ansatz {name:?}; known: {}", registry.names().join(", "));
            }
        }
        if let Some(s) = &self.sweep {
            if let Some(v) = &s.values {
                if v.iter().any(|x| !x.is_finite()) {
                    bail!("sweep values must be finite");
                }
            }
            let known: &[&str] = match self.model {
                Model::Hubbard(_) => &["t", "u", "mu", "delta"],
                Model::Ppp { .. } => &["lambda"],
                Model::Operator { .. } => &[],
            };
            if !known.contains(&s.parameter.as_str()) {
                bail!("cannot sweep {:?} for this model", s.parameter);
            }
        }
        if !(self.penalty >= 0.0) {
            bail!("penalty weight must be non-negative");
        }
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn ppp_table(&self) -> Result<PppTable> {
        match &self.model {
            Model::Ppp { table } => Ok(PppTable::load(self.resolve(table))?),
            _ => bail!("not a PPP model"),
        }
    }

    fn sweep_values(&self) -> Result<Option<Vec<f64>>> {
        let Some(s) = &self.sweep else { return Ok(None) };
        if let Some(v) = &s.values {
            return Ok(Some(v.clone()));
        }
        Ok(Some(match s.parameter.as_str() {
            "u" => DEFAULT_U_SWEEP.to_vec(),
            "delta" => DEFAULT_DELTA_SWEEP.to_vec(),
            "lambda" => self.ppp_table()?.lambdas(),
            p => bail!("no default grid for {p:?}; give sweep values"),
        }))
    }

    /// Sweep points in order; a single unlabelled point without a sweep.
    pub fn points(&self) -> Result<Vec<Point>> {
        let values = self.sweep_values()?;
        let build = |value: Option<f64>| -> Result<HamiltonianSpec> {
            Ok(match &self.model {
                Model::Hubbard(h) => {
                    let mut h = *h;
                    if let (Some(v), Some(s)) = (value, &self.sweep) {
                        match s.parameter.as_str() {
                            "t" => h.t = v,
                            "u" => h.u = v,
                            "mu" => h.mu = v,
                            _ => h.delta = v,
                        }
                    }
                    build_hubbard(&h)?
                }
                Model::Ppp { .. } => {
                    let table = self.ppp_table()?;
                    let lambda = match value {
                        Some(v) => v,
                        None => *table.lambdas().first().context("empty PPP table")?,
                    };
                    build_ppp(table.entry(lambda)?)?
                }
                Model::Operator { path } => {
                    let p = self.resolve(path);
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    HamiltonianSpec::from_operator(&FermionOperator::from_json(&text)?)?
                }
            })
        };
        match values {
            None => Ok(vec![Point { label: String::new(), spec: build(None)? }]),
            Some(v) => v
                .into_iter()
                .map(|x| Ok(Point { label: format_value(x), spec: build(Some(x))? }))
                .collect(),
        }
    }

    /// Number target for a point; pairing terms switch the penalty off.
    pub fn n_target_for(&self, spec: &HamiltonianSpec) -> Option<f64> {
        self.n_target.filter(|_| spec.conserves_number())
    }

    pub fn vqe_options(&self) -> VqeOptions {
        VqeOptions { seed: self.seed, ..self.optimizer.clone() }
    }

    pub fn ghf_options(&self) -> GhfOptions {
        GhfOptions { seed: self.seed, ..self.ghf.clone() }
    }

    pub fn decompose_config(&self) -> DecomposeConfig {
        DecomposeConfig { seed: self.seed, ..self.decompose.clone() }
    }

    /// Explicit line, else chemical accuracy for PPP tables in eV or hartree.
    pub fn accuracy_line(&self) -> Option<f64> {
        if self.accuracy_line.is_some() {
            return self.accuracy_line;
        }
        let table = self.ppp_table().ok()?;
        match table.units.get("energy").map(String::as_str) {
            Some("eV") | Some("ev") => Some(CHEMICAL_ACCURACY_EV),
            Some("hartree") => Some(CHEMICAL_ACCURACY_EV / HARTREE_EV),
            _ => None,
        }
    }
}

pub fn format_value(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> ExperimentConfig {
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        cfg.validate().unwrap();
        cfg
    }

    #[test]
    fn default_grids() {
        let u = parse(r#"{"id":"a","model":{"kind":"hubbard","nx":2,"ny":1,"t":1,"u":0},"sweep":{"parameter":"u"}}"#);
        let labels: Vec<String> = u.points().unwrap().into_iter().map(|p| p.label).collect();
        assert_eq!(labels, ["0", "1", "2", "4", "6", "8"]);
        let d = parse(r#"{"id":"a","model":{"kind":"hubbard","nx":2,"ny":1,"t":1,"u":-8},"sweep":{"parameter":"delta"}}"#);
        assert_eq!(d.points().unwrap().len(), 5);
    }

    #[test]
    fn pairing_points_drop_the_number_target() {
        let cfg = parse(
            r#"{"id":"a","model":{"kind":"hubbard","nx":2,"ny":1,"t":1,"u":-8},
                "sweep":{"parameter":"delta","values":[0,1]},"n_target":2}"#,
        );
        let targets: Vec<Option<f64>> = cfg.points().unwrap().iter().map(|p| cfg.n_target_for(&p.spec)).collect();
        assert_eq!(targets, [Some(2.0), None]);
    }

    #[test]
    fn rejects_unknown_names() {
        let bad: ExperimentConfig =
            serde_json::from_str(r#"{"id":"a","model":{"kind":"hubbard","nx":2,"ny":1,"t":1,"u":0},"ansatz":["ldca-9"]}"#).unwrap();
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"id":"a","model":{"kind":"lattice"}}"#).is_err());
    }
}
