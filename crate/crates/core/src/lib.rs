pub mod benchmark;
pub mod circuit;
pub mod error;
pub mod exact;
pub mod fermion;
pub mod fock;
pub mod ghf;
pub mod jw;
pub mod linalg;
pub mod majorana;
pub mod matchgate;
pub mod optim;
pub mod pauli;
pub mod sim;
pub mod vqe;

pub use error::{Error, Result};
