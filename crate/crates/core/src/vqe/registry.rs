use std::collections::BTreeMap;

use super::bucc::{BuccAnsatz, BuccOrder};
use super::ldca::LdcaAnsatz;
use super::{GhfReference, Objective, ObjectiveValue};
use crate::circuit::GateSequence;
use crate::error::{Error, Result};
use crate::sim::Statevector;

/// A parameterized state on top of a GHF reference.
///
/// Parameter vectors of nested ansatzes of one family line up by prefix:
/// padding the optimum of a smaller member with zeros reproduces its state
/// in the larger one (`ghf` < `ldca-1` < `ldca-2`, `bucc-s` < `buccsd`).
pub trait Ansatz: Send + Sync {
    fn name(&self) -> &str;

    /// Members of one family nest by parameter prefix.
    fn family(&self) -> &str {
        self.name()
    }

    fn num_params(&self) -> usize;

    fn prepare(&self, x: &[f64]) -> Result<Statevector>;

    /// Objective at `x`, with its gradient written to `grad`.
    fn value_and_gradient(&self, x: &[f64], obj: &Objective, grad: &mut [f64]) -> Result<ObjectiveValue>;

    /// Gate sequence, for circuit ansatzes.
    fn circuit(&self, _x: &[f64]) -> Option<GateSequence> {
        None
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_params() {
            return Err(Error::DimensionMismatch { expected: self.num_params(), found: x.len() });
        }
        Ok(())
    }
}

pub type AnsatzFactory = Box<dyn Fn(&GhfReference) -> Result<Box<dyn Ansatz>> + Send + Sync>;

/// Ansatz constructors by name.
pub struct AnsatzRegistry {
    factories: BTreeMap<String, AnsatzFactory>,
}

impl Default for AnsatzRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("ghf", Box::new(|g| Ok(Box::new(LdcaAnsatz::new(g, 0)))));
        for l in 1..=3 {
            r.register(&format!("ldca-{l}"), Box::new(move |g| Ok(Box::new(LdcaAnsatz::new(g, l)))));
        }
        r.register("bucc-s", Box::new(|g| Ok(Box::new(BuccAnsatz::new(g, BuccOrder::S)?))));
        r.register("buccsd", Box::new(|g| Ok(Box::new(BuccAnsatz::new(g, BuccOrder::SD)?))));
        r
    }
}

impl AnsatzRegistry {
    pub fn empty() -> Self {
        Self { factories: BTreeMap::new() }
    }

    /// Replaces any factory already under `name`.
    pub fn register(&mut self, name: &str, factory: AnsatzFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn build(&self, name: &str, reference: &GhfReference) -> Result<Box<dyn Ansatz>> {
        let f = self.factories.get(name).ok_or_else(|| {
            Error::invalid(format!("unknown ansatz `{name}` (known: {})", self.names().join(", ")))
        })?;
        f(reference)
    }
}
