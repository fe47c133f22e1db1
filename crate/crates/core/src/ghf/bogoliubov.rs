use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CovarianceMatrix, SingleParticleDensity};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, max_norm};

/// Quasiparticle operators `b_j = sum_p conj(U_pj) a_p + conj(V_pj) a+_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct BogoliubovTransform {
    pub u: DMatrix<Complex64>,
    pub v: DMatrix<Complex64>,
}

impl BogoliubovTransform {
    pub fn new(u: DMatrix<Complex64>, v: DMatrix<Complex64>) -> Result<Self> {
        let m = u.nrows();
        if u.shape() != (m, m) || v.shape() != (m, m) {
            return Err(Error::invalid("U and V must be square and of equal size"));
        }
        let t = Self { u, v };
        let err = t.unitarity_error();
        if err > 1e-10 {
            return Err(Error::invalid(format!("Bogoliubov transform is not unitary ({err:.2e})")));
        }
        Ok(t)
    }

    pub fn identity(modes: usize) -> Self {
        Self { u: DMatrix::identity(modes, modes), v: DMatrix::zeros(modes, modes) }
    }

    pub fn modes(&self) -> usize {
        self.u.nrows()
    }

    /// `W = [[U, V^*], [V, U^*]]`, with `(b, b+) = W^+ (a, a+)`.
    pub fn assembled(&self) -> DMatrix<Complex64> {
        let m = self.modes();
        let mut w = DMatrix::zeros(2 * m, 2 * m);
        w.view_mut((0, 0), (m, m)).copy_from(&self.u);
        w.view_mut((0, m), (m, m)).copy_from(&self.v.map(|z| z.conj()));
        w.view_mut((m, 0), (m, m)).copy_from(&self.v);
        w.view_mut((m, m), (m, m)).copy_from(&self.u.map(|z| z.conj()));
        w
    }

    pub fn unitarity_error(&self) -> f64 {
        let w = self.assembled();
        let n = w.nrows();
        max_norm(&(w.adjoint() * &w - DMatrix::identity(n, n)))
    }

    /// Real orthogonal `R` with `g'_j = sum_k R_jk g_k` for the quasiparticle
    /// Majorana operators `g'`.
    pub fn to_orthogonal(&self) -> DMatrix<f64> {
        let m = self.modes();
        let s = &self.u + &self.v;
        let d = &self.u - &self.v;
        let mut r = DMatrix::zeros(2 * m, 2 * m);
        for j in 0..m {
            for p in 0..m {
                r[(j, p)] = s[(p, j)].re;
                r[(j, p + m)] = -d[(p, j)].im;
                r[(j + m, p)] = s[(p, j)].im;
                r[(j + m, p + m)] = d[(p, j)].re;
            }
        }
        r
    }

    /// Inverse of [`Self::to_orthogonal`].
    pub fn from_orthogonal(r: &DMatrix<f64>) -> Result<Self> {
        let n = r.nrows();
        if r.ncols() != n || n % 2 == 1 {
            return Err(Error::invalid("orthogonal matrix must be 2M x 2M"));
        }
        let orth = (r * r.transpose() - DMatrix::identity(n, n)).amax();
        if orth > 1e-10 {
            return Err(Error::invalid(format!("matrix is not orthogonal ({orth:.2e})")));
        }
        let m = n / 2;
        let mut u = DMatrix::zeros(m, m);
        let mut v = DMatrix::zeros(m, m);
        for j in 0..m {
            for p in 0..m {
                let s = Complex64::new(r[(j, p)], r[(j + m, p)]);
                let d = Complex64::new(r[(j + m, p + m)], -r[(j, p + m)]);
                u[(p, j)] = (s + d) * 0.5;
                v[(p, j)] = (s - d) * 0.5;
            }
        }
        Self::new(u, v)
    }

    /// Covariance of the quasiparticle vacuum, `R^T G_vac R`.
    pub fn covariance(&self) -> CovarianceMatrix {
        let r = self.to_orthogonal();
        let vac = CovarianceMatrix::vacuum(self.modes());
        CovarianceMatrix::from_raw(r.transpose() * vac.matrix() * r)
    }

    pub fn to_json(&self) -> Result<String> {
        let flat = |m: &DMatrix<Complex64>| m.transpose().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
        Ok(serde_json::to_string(&BogoliubovJson { modes: self.modes(), u: flat(&self.u), v: flat(&self.v) })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: BogoliubovJson = serde_json::from_str(s)?;
        let m = raw.modes;
        let mat = |d: &[[f64; 2]]| -> Result<DMatrix<Complex64>> {
            if d.len() != m * m {
                return Err(Error::DimensionMismatch { expected: m * m, found: d.len() });
            }
            Ok(DMatrix::from_row_iterator(m, m, d.iter().map(|z| Complex64::new(z[0], z[1]))))
        };
        Self::new(mat(&raw.u)?, mat(&raw.v)?)
    }
}

#[derive(Serialize, Deserialize)]
struct BogoliubovJson {
    modes: usize,
    /// Row-major `[re, im]` pairs.
    u: Vec<[f64; 2]>,
    v: Vec<[f64; 2]>,
}

/// Quasiparticle transform whose vacuum has covariance `gamma`, read off
/// the unit eigenspace of the generalized density matrix. A degenerate
/// eigenspace is spanned deterministically by projecting the canonical
/// basis vectors, largest projection first, and orthonormalizing.
pub fn extract_bogoliubov(gamma: &CovarianceMatrix) -> Result<BogoliubovTransform> {
    let purity = gamma.purity();
    if purity < 1.0 - 1e-8 || gamma.pure_state_error() > 1e-6 {
        return Err(Error::NotPure(1.0 - purity));
    }
    let m = gamma.modes();
    let dens = SingleParticleDensity::from_covariance(gamma);
    let gen = dens.generalized();
    let (vals, vecs) = hermitian_eigen(&gen)?;
    let mut unit = Vec::new();
    for (k, &e) in vals.iter().enumerate() {
        if (e - 1.0).abs() < 1e-6 {
            unit.push(k);
        } else if e.abs() >= 1e-6 {
            return Err(Error::NotPure((e - e.round()).abs()));
        }
    }
    if unit.len() != m {
        return Err(Error::Eigen(format!("expected {m} unit eigenvalues, found {}", unit.len())));
    }
    let n = 2 * m;
    let mut basis = DMatrix::<Complex64>::zeros(n, m);
    for (c, &k) in unit.iter().enumerate() {
        basis.set_column(c, &vecs.column(k));
    }
    let proj = &basis * basis.adjoint();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| proj[(b, b)].re.total_cmp(&proj[(a, a)].re).then(a.cmp(&b)));
    let mut chosen: Vec<DVector<Complex64>> = Vec::with_capacity(m);
    for &i in &order {
        if chosen.len() == m {
            break;
        }
        let mut w: DVector<Complex64> = proj.column(i).into_owned();
        for q in &chosen {
            let ov = q.dotc(&w);
            w -= q * ov;
        }
        let norm = w.norm();
        if norm > 1e-8 {
            chosen.push(w / Complex64::new(norm, 0.0));
        }
    }
    if chosen.len() != m {
        return Err(Error::Eigen("could not span the quasiparticle space".into()));
    }
    let mut u = DMatrix::zeros(m, m);
    let mut v = DMatrix::zeros(m, m);
    for (j, w) in chosen.iter().enumerate() {
        for p in 0..m {
            u[(p, j)] = w[p].conj();
            v[(p, j)] = -w[p + m].conj();
        }
    }
    BogoliubovTransform::new(u, v)
}
