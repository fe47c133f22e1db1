use nalgebra::DMatrix;
use num_complex::Complex64;

use super::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::linalg::{antisymmetrize, pfaffian};
use crate::majorana::MajoranaHamiltonian;

/// `tr(rho g_j1 ... g_j2p) = i^-p Pf(G restricted to j)` for strictly
/// increasing 0-based indices. Odd-length products vanish. The value is
/// real for even `p` and imaginary for odd `p`.
pub fn wick_expectation(gamma: &CovarianceMatrix, indices: &[usize]) -> Result<Complex64> {
    let n = gamma.matrix().nrows();
    for w in indices.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::invalid("indices must be strictly increasing"));
        }
    }
    if let Some(&last) = indices.last() {
        if last >= n {
            return Err(Error::IndexOutOfRange { index: last, len: n });
        }
    }
    if indices.len() % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let p = indices.len() / 2;
    let g = gamma.matrix();
    let sub = DMatrix::from_fn(2 * p, 2 * p, |a, b| g[(indices[a], indices[b])]);
    let pf = pfaffian(&sub)?;
    Ok(match p % 4 {
        0 => Complex64::new(pf, 0.0),
        1 => Complex64::new(0.0, -pf),
        2 => Complex64::new(-pf, 0.0),
        _ => Complex64::new(0.0, pf),
    })
}

fn pf4(g: &DMatrix<f64>, k: &[usize; 4]) -> f64 {
    let [a, b, c, d] = *k;
    g[(a, b)] * g[(c, d)] - g[(a, c)] * g[(b, d)] + g[(a, d)] * g[(b, c)]
}

/// `E = offset + sum T_pq G_pq + sum_{a<b<c<d} c_abcd <g_a g_b g_c g_d>`.
pub fn ghf_energy(h: &MajoranaHamiltonian, gamma: &CovarianceMatrix) -> Result<f64> {
    if gamma.modes() != h.modes {
        return Err(Error::DimensionMismatch { expected: h.modes, found: gamma.modes() });
    }
    if h.has_three_body() {
        return Err(Error::Unsupported("three-body terms in the Gaussian energy".into()));
    }
    let g = gamma.matrix();
    let quad: f64 = h.t.component_mul(g).sum();
    // <g_a g_b g_c g_d> = -Pf
    let quart: f64 = h.quartic.iter().map(|(k, c)| -c * pf4(g, k)).sum();
    Ok(h.offset + quad + quart)
}

/// Gradient `h = dE/dG` restricted to antisymmetric variations, so that
/// `dE = sum_ij h_ij dG_ij`. Equals `T + 6 sum_kl V_ijkl G_kl`.
pub fn effective_hamiltonian(h: &MajoranaHamiltonian, gamma: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    if gamma.modes() != h.modes {
        return Err(Error::DimensionMismatch { expected: h.modes, found: gamma.modes() });
    }
    if h.has_three_body() {
        return Err(Error::Unsupported("three-body terms in the effective Hamiltonian".into()));
    }
    let g = gamma.matrix();
    let mut out = h.t.clone();
    // d(-c Pf4)/dG_xy on the upper triangle, halved into h_xy and -h_yx
    for &([a, b, c, d], coef) in &h.quartic {
        let w = -0.5 * coef;
        let mut add = |x: usize, y: usize, v: f64| {
            out[(x, y)] += w * v;
            out[(y, x)] -= w * v;
        };
        add(a, b, g[(c, d)]);
        add(c, d, g[(a, b)]);
        add(a, c, -g[(b, d)]);
        add(b, d, -g[(a, c)]);
        add(a, d, g[(b, c)]);
        add(b, c, g[(a, d)]);
    }
    Ok(antisymmetrize(&out))
}

/// Reference contraction `T + 6 sum_kl V_ijkl G_kl` over the dense tensor.
pub fn effective_hamiltonian_dense(h: &MajoranaHamiltonian, gamma: &CovarianceMatrix) -> DMatrix<f64> {
    let n = h.dim();
    let v = h.v_dense();
    let g = gamma.matrix();
    let mut out = h.t.clone();
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += v[((i * n + j) * n + k) * n + l] * g[(k, l)];
                }
            }
            out[(i, j)] += 6.0 * acc;
        }
    }
    out
}
