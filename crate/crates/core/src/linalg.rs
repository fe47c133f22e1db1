//! Dense linear-algebra helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub fn max_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.norm()))
}

/// `max |A + A^T|`.
pub fn antisymmetry_error(a: &DMatrix<f64>) -> f64 {
    max_abs(&(a + a.transpose()))
}

pub fn antisymmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a - a.transpose()) * 0.5
}

/// Pfaffian by skew-symmetric tridiagonalization with partial pivoting.
pub fn pfaffian(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if n % 2 == 1 {
        return Err(Error::invalid("Pfaffian of an odd-dimensional matrix"));
    }
    let scale = max_abs(a).max(1.0);
    if antisymmetry_error(a) > 1e-10 * scale {
        return Err(Error::invalid("matrix is not antisymmetric"));
    }
    let mut m = antisymmetrize(a);
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        for r in k + 2..n {
            if m[(r, k)].abs() > m[(kp, k)].abs() {
                kp = r;
            }
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            m.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let piv = m[(k, k + 1)];
        if piv == 0.0 {
            return Ok(0.0);
        }
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| m[(k, j)] / piv).collect();
            let col: Vec<f64> = (k + 2..n).map(|j| m[(j, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    Ok(pf)
}

/// Haar-random special orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if n > 0 && q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Haar-random unitary matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
    }
    q
}

pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.clone().exp()
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> Result<(DVector<f64>, DMatrix<Complex64>)> {
    let n = h.nrows();
    let dev = max_norm(&(h - h.adjoint()));
    if dev > 1e-8 * max_norm(h).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let sym = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(sym, 1e-15, 0)
        .ok_or_else(|| Error::Eigen("Hermitian eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

/// Real symmetric eigenpairs, eigenvalues ascending.
pub fn symmetric_eigen(h: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = h.nrows();
    let sym = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, 1e-15, 0)
        .ok_or_else(|| Error::Eigen("symmetric eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

/// `f(H)` for Hermitian `H`.
pub fn hermitian_function(h: &DMatrix<Complex64>, f: impl Fn(f64) -> f64) -> Result<DMatrix<Complex64>> {
    let (vals, vecs) = hermitian_eigen(h)?;
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let s = f(vals[j]);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    Ok(scaled * vecs.adjoint())
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn hermitian_exp_i(h: &DMatrix<Complex64>, t: f64) -> Result<DMatrix<Complex64>> {
    let (vals, vecs) = hermitian_eigen(h)?;
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let ph = Complex64::from_polar(1.0, -t * vals[j]);
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    Ok(scaled * vecs.adjoint())
}

pub fn complexify(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    a.map(|z| z.re)
}

pub fn imag_part(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    a.map(|z| z.im)
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}
