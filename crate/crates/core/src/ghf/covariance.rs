use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{antisymmetrize, antisymmetry_error, complexify, hermitian_function, random_orthogonal};

/// Covariance matrix `G_kl = (i/2) <[g_k, g_l]>` of a fermionic Gaussian
/// state, `2M x 2M`, real antisymmetric. For a single mode
/// `G_{p,p+M} = 1 - 2 n_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    gamma: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps `gamma`, symmetrizing away rounding up to `1e-12`.
    pub fn new(gamma: DMatrix<f64>) -> Result<Self> {
        let n = gamma.nrows();
        if gamma.ncols() != n || n % 2 == 1 {
            return Err(Error::invalid(format!("covariance must be 2M x 2M, got {}x{}", n, gamma.ncols())));
        }
        let dev = antisymmetry_error(&gamma);
        if dev > 1e-12 {
            return Err(Error::invalid(format!("covariance not antisymmetric ({dev:.2e})")));
        }
        Ok(Self { gamma: antisymmetrize(&gamma) })
    }

    pub(crate) fn from_raw(gamma: DMatrix<f64>) -> Self {
        Self { gamma: antisymmetrize(&gamma) }
    }

    /// State with the given modes occupied and all others empty.
    pub fn occupation(modes: usize, occupied: &[usize]) -> Self {
        let mut g = DMatrix::zeros(2 * modes, 2 * modes);
        for p in 0..modes {
            let s = if occupied.contains(&p) { -1.0 } else { 1.0 };
            g[(p, p + modes)] = s;
            g[(p + modes, p)] = -s;
        }
        Self { gamma: g }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::occupation(modes, &[])
    }

    /// `O G_vac O^T` for a Haar-random `O` in SO(2M).
    pub fn random_pure<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Self {
        let o = random_orthogonal(2 * modes, rng);
        Self::vacuum(modes).conjugated(&o)
    }

    pub fn modes(&self) -> usize {
        self.gamma.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.gamma
    }

    /// `O G O^T`.
    pub fn conjugated(&self, o: &DMatrix<f64>) -> Self {
        Self::from_raw(o * &self.gamma * o.transpose())
    }

    /// `-tr(G^2) / 2M`; one for pure states.
    pub fn purity(&self) -> f64 {
        let n = self.gamma.nrows();
        if n == 0 {
            return 1.0;
        }
        -(&self.gamma * &self.gamma).trace() / n as f64
    }

    /// `max |G^2 + 1|`.
    pub fn pure_state_error(&self) -> f64 {
        let n = self.gamma.nrows();
        let sq = &self.gamma * &self.gamma + DMatrix::identity(n, n);
        sq.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.pure_state_error() < tol
    }

    /// Nearest pure covariance, `i sign(-i G)`.
    pub fn purified(&self) -> Result<Self> {
        let k = complexify(&self.gamma) * Complex64::new(0.0, -1.0);
        let s = hermitian_function(&k, |x| if x >= 0.0 { 1.0 } else { -1.0 })?;
        Ok(Self::from_raw((s * Complex64::new(0.0, 1.0)).map(|z| z.re)))
    }

    /// Mean occupation `<n_p> = (1 - G_{p,p+M}) / 2`.
    pub fn occupation_numbers(&self) -> Vec<f64> {
        let m = self.modes();
        (0..m).map(|p| 0.5 * (1.0 - self.gamma[(p, p + m)])).collect()
    }

    pub fn particle_number(&self) -> f64 {
        self.occupation_numbers().iter().sum()
    }

    /// Fermion parity `<(-1)^N> = Pf(G)` of a pure state, `+1` for the vacuum.
    pub fn parity(&self) -> Result<f64> {
        let m = self.modes();
        // reorder to (A_0, B_0, A_1, B_1, ...) so the vacuum has Pf = +1
        let perm: Vec<usize> = (0..m).flat_map(|p| [p, p + m]).collect();
        let g = DMatrix::from_fn(2 * m, 2 * m, |i, j| self.gamma[(perm[i], perm[j])]);
        crate::linalg::pfaffian(&g)
    }

    pub fn to_json(&self) -> Result<String> {
        let m = self.modes();
        let raw = CovarianceJson {
            modes: m,
            gamma: self.gamma.transpose().iter().copied().collect(),
        };
        Ok(serde_json::to_string(&raw)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: CovarianceJson = serde_json::from_str(s)?;
        let n = 2 * raw.modes;
        if raw.gamma.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: raw.gamma.len() });
        }
        Self::new(DMatrix::from_row_slice(n, n, &raw.gamma))
    }
}

#[derive(Serialize, Deserialize)]
struct CovarianceJson {
    modes: usize,
    /// Row-major.
    gamma: Vec<f64>,
}

/// `(Q, R)` blocks of `G_c = (1/4) W^+ G W^*`, with `g = W (a, a+)`.
/// `G_c = [[Q, R], [R^*, Q^*]]` holds `(i/2) <[d_k, d_l]>` for `d = (a, a+)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexCovariance {
    pub q: DMatrix<Complex64>,
    pub r: DMatrix<Complex64>,
}

/// `W = [[1, 1], [i, -i]]` mapping `(a, a+)` to Majorana operators.
pub fn omega(modes: usize) -> DMatrix<Complex64> {
    let mut w = DMatrix::zeros(2 * modes, 2 * modes);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for p in 0..modes {
        w[(p, p)] = one;
        w[(p, p + modes)] = one;
        w[(p + modes, p)] = i;
        w[(p + modes, p + modes)] = -i;
    }
    w
}

impl ComplexCovariance {
    pub fn from_real(g: &CovarianceMatrix) -> Self {
        let m = g.modes();
        let w = omega(m);
        let gc = w.adjoint() * complexify(g.matrix()) * w.map(|z| z.conj()) * Complex64::new(0.25, 0.0);
        Self {
            q: gc.view((0, 0), (m, m)).into_owned(),
            r: gc.view((0, m), (m, m)).into_owned(),
        }
    }

    pub fn assemble(&self) -> DMatrix<Complex64> {
        let m = self.q.nrows();
        let mut gc = DMatrix::zeros(2 * m, 2 * m);
        gc.view_mut((0, 0), (m, m)).copy_from(&self.q);
        gc.view_mut((0, m), (m, m)).copy_from(&self.r);
        gc.view_mut((m, 0), (m, m)).copy_from(&self.r.map(|z| z.conj()));
        gc.view_mut((m, m), (m, m)).copy_from(&self.q.map(|z| z.conj()));
        gc
    }

    /// Inverse map `G = W G_c W^T`.
    pub fn to_real(&self) -> Result<CovarianceMatrix> {
        let m = self.q.nrows();
        let w = omega(m);
        let g = &w * self.assemble() * w.transpose();
        let im = g.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
        if im > 1e-10 {
            return Err(Error::invalid(format!("complex covariance does not map to a real matrix ({im:.2e})")));
        }
        CovarianceMatrix::new(antisymmetrize(&g.map(|z| z.re)))
    }
}

/// Generalized density `M = [[rho, kappa^+], [kappa, 1 - rho^T]]` with
/// `rho_kl = <a_l a+_k>` and `kappa_kl = <a_k a_l>`. `M` is a projector for
/// pure states and its unit eigenvectors define the quasiparticles.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleParticleDensity {
    pub rho: DMatrix<Complex64>,
    pub kappa: DMatrix<Complex64>,
}

impl SingleParticleDensity {
    pub fn from_covariance(g: &CovarianceMatrix) -> Self {
        let c = ComplexCovariance::from_real(g);
        let m = g.modes();
        let i = Complex64::new(0.0, 1.0);
        let kappa = &c.q * (-i);
        let rho = DMatrix::identity(m, m) * Complex64::new(0.5, 0.0) - c.r.transpose() * i;
        Self { rho, kappa }
    }

    pub fn generalized(&self) -> DMatrix<Complex64> {
        let m = self.rho.nrows();
        let mut g = DMatrix::zeros(2 * m, 2 * m);
        g.view_mut((0, 0), (m, m)).copy_from(&self.rho);
        g.view_mut((0, m), (m, m)).copy_from(&self.kappa.adjoint());
        g.view_mut((m, 0), (m, m)).copy_from(&self.kappa);
        let hole = DMatrix::<Complex64>::identity(m, m) - self.rho.transpose();
        g.view_mut((m, m), (m, m)).copy_from(&hole);
        g
    }

    /// `max |M^2 - M|`.
    pub fn idempotency_error(&self) -> f64 {
        let g = self.generalized();
        crate::linalg::max_norm(&(&g * &g - &g))
    }
}
