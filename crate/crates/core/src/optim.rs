//! Quasi-Newton minimization: BFGS with a strong-Wolfe line search.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BfgsOptions {
    pub max_iters: usize,
    /// Stop when `max |grad| < grad_tol`.
    pub grad_tol: f64,
    /// Stop when the objective falls below this value.
    pub f_target: f64,
    /// Stop after `stall_iters` iterations improving by less than
    /// `f_tol * (1 + |f|)` each.
    pub f_tol: f64,
    pub stall_iters: usize,
    pub c1: f64,
    pub c2: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_tol: 1e-10,
            f_target: f64::NEG_INFINITY,
            f_tol: 1e-15,
            stall_iters: 5,
            c1: 1e-4,
            c2: 0.9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Gradient,
    Target,
    Stalled,
    LineSearch,
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        self.evals += 1;
        let mut g = vec![0.0; x.len()];
        let v = (self.f)(x.as_slice(), &mut g);
        (v, DVector::from_vec(g))
    }
}

struct Point {
    alpha: f64,
    f: f64,
    d: f64,
    g: DVector<f64>,
}

fn line_search<F: FnMut(&[f64], &mut [f64]) -> f64>(
    obj: &mut Counted<F>,
    x: &DVector<f64>,
    p: &DVector<f64>,
    f0: f64,
    d0: f64,
    opts: &BfgsOptions,
) -> Option<Point> {
    let mut eval = |alpha: f64| {
        let (f, g) = obj.eval(&(x + p * alpha));
        let d = g.dot(p);
        Point { alpha, f, d, g }
    };
    let armijo = |pt: &Point| pt.f <= f0 + opts.c1 * pt.alpha * d0;
    let mut prev = Point { alpha: 0.0, f: f0, d: d0, g: DVector::zeros(0) };
    let mut alpha = 1.0;
    for i in 0..40 {
        let cur = eval(alpha);
        if !cur.f.is_finite() {
            alpha *= 0.1;
            continue;
        }
        if !armijo(&cur) || (i > 0 && cur.f >= prev.f) {
            return zoom(&mut eval, prev, cur, f0, d0, opts);
        }
        if cur.d.abs() <= -opts.c2 * d0 {
            return Some(cur);
        }
        if cur.d >= 0.0 {
            return zoom(&mut eval, cur, prev, f0, d0, opts);
        }
        alpha *= 2.0;
        prev = cur;
    }
    None
}

fn zoom(
    eval: &mut impl FnMut(f64) -> Point,
    mut lo: Point,
    mut hi: Point,
    f0: f64,
    d0: f64,
    opts: &BfgsOptions,
) -> Option<Point> {
    for _ in 0..60 {
        let (a, b) = (lo.alpha, hi.alpha);
        // safeguarded quadratic interpolation from lo's value and slope
        let mut alpha = {
            let denom = 2.0 * (hi.f - lo.f - lo.d * (b - a));
            if denom.abs() > 0.0 && hi.f.is_finite() {
                a - lo.d * (b - a) * (b - a) / denom
            } else {
                0.5 * (a + b)
            }
        };
        let (left, right) = if a < b { (a, b) } else { (b, a) };
        let margin = 0.1 * (right - left);
        if !(alpha > left + margin && alpha < right - margin) {
            alpha = 0.5 * (a + b);
        }
        if (right - left) < 1e-16 * right.abs().max(1e-300) {
            break;
        }
        let cur = eval(alpha);
        if cur.f > f0 + opts.c1 * alpha * d0 || cur.f >= lo.f {
            hi = cur;
        } else {
            if cur.d.abs() <= -opts.c2 * d0 {
                return Some(cur);
            }
            if cur.d * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    (lo.alpha > 0.0 && lo.f < f0).then_some(lo)
}

/// Minimizes `f`, which writes the gradient into its second argument and
/// returns the value.
pub fn minimize<F>(f: F, x0: &[f64], opts: &BfgsOptions) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut obj = Counted { f, evals: 0 };
    let mut x = DVector::from_column_slice(x0);
    let (mut fx, mut g) = obj.eval(&x);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut stall = 0;
    let mut it = 0;
    let termination = loop {
        let gmax = g.amax();
        if n == 0 || gmax < opts.grad_tol {
            break Termination::Gradient;
        }
        if fx <= opts.f_target {
            break Termination::Target;
        }
        if it >= opts.max_iters {
            break Termination::MaxIters;
        }
        it += 1;
        let mut p = -(&h * &g);
        let mut d0 = p.dot(&g);
        if d0 >= 0.0 {
            h = DMatrix::identity(n, n);
            fresh = true;
            p = -g.clone();
            d0 = p.dot(&g);
        }
        let step = match line_search(&mut obj, &x, &p, fx, d0, opts) {
            Some(pt) => pt,
            None if !fresh => {
                h = DMatrix::identity(n, n);
                fresh = true;
                continue;
            }
            None => break Termination::LineSearch,
        };
        let s = &p * step.alpha;
        let y = &step.g - &g;
        let improvement = fx - step.f;
        x += &s;
        fx = step.f;
        g = step.g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            if fresh {
                h *= sy / y.dot(&y);
                fresh = false;
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            h += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        if improvement < opts.f_tol * (1.0 + fx.abs()) {
            stall += 1;
            if stall >= opts.stall_iters {
                break Termination::Stalled;
            }
        } else {
            stall = 0;
        }
    };
    Minimum {
        grad_norm: g.amax(),
        x: x.as_slice().to_vec(),
        f: fx,
        iterations: it,
        evaluations: obj.evals,
        termination,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let m = minimize(f, &[-1.2, 1.0], &BfgsOptions::default());
        assert!((m.x[0] - 1.0).abs() < 1e-8 && (m.x[1] - 1.0).abs() < 1e-8, "{m:?}");
    }

    #[test]
    fn quadratic_bowl_in_many_dimensions() {
        let n = 30;
        let f = |x: &[f64], g: &mut [f64]| {
            let mut v = 0.0;
            for i in 0..n {
                let w = (i + 1) as f64;
                v += 0.5 * w * (x[i] - 1.0).powi(2);
                g[i] = w * (x[i] - 1.0);
            }
            v
        };
        let m = minimize(f, &vec![0.0; n], &BfgsOptions::default());
        assert!(m.f < 1e-18);
        assert!(m.iterations < 100);
    }

    #[test]
    fn target_stops_early() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            x[0] * x[0]
        };
        let m = minimize(f, &[3.0], &BfgsOptions { f_target: 1.0, ..Default::default() });
        assert!(m.f <= 1.0);
        assert_eq!(minimize(|_: &[f64], _: &mut [f64]| 0.0, &[], &BfgsOptions::default()).termination, Termination::Gradient);
    }
}
