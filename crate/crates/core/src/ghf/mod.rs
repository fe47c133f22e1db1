//! Generalized Hartree-Fock on fermionic Gaussian states.

mod bogoliubov;
mod covariance;
mod evolve;
mod wick;

pub use bogoliubov::{extract_bogoliubov, BogoliubovTransform};
pub use covariance::{omega, ComplexCovariance, CovarianceMatrix, SingleParticleDensity};
pub use evolve::{
    fixed_point_refine, imaginary_time_evolve, quadratic_ground_covariance, solve_ghf, starting_point, Evolution,
    GhfOptions, GhfResult, ImaginaryTimeOptions,
};
pub use wick::{effective_hamiltonian, effective_hamiltonian_dense, ghf_energy, wick_expectation};
