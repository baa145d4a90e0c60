//! Small smooth-optimization toolkit: L-BFGS with Armijo backtracking,
//! golden-section search and bisection.

use nalgebra::DVector;
use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when ‖∇f‖ ≤ grad_tol.
    pub grad_tol: f64,
    /// Stop when |Δf| ≤ f_tol·(1 + |f|) for 3 consecutive steps.
    pub f_tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions { memory: 12, max_iter: 500, grad_tol: 1e-10, f_tol: 1e-15 }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize a smooth function. `fg` returns the value and gradient, or
/// `None` outside the domain (the line search then backtracks).
/// `on_iterate` sees every accepted point.
pub fn lbfgs<F, C>(x0: DVector<f64>, mut fg: F, opts: &LbfgsOptions, mut on_iterate: C) -> LbfgsResult
where
    F: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
    C: FnMut(&DVector<f64>),
{
    let mut x = x0;
    let (mut f, mut g) = match fg(&x) {
        Some(v) => v,
        None => {
            return LbfgsResult { grad_norm: f64::NAN, x, f: f64::NAN, iterations: 0, converged: false };
        }
    };
    let mut hist: VecDeque<(DVector<f64>, DVector<f64>, f64)> = VecDeque::new();
    let mut small_steps = 0;
    let mut iterations = 0;
    let mut converged = false;

    for it in 0..opts.max_iter {
        iterations = it;
        let gn = g.norm();
        if gn <= opts.grad_tol {
            converged = true;
            break;
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * s.dot(&q);
            q.axpy(-a, y, 1.0);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = s.dot(y) / y.dot(y);
            q.scale_mut(gamma);
        } else {
            q.scale_mut(1.0 / gn.max(1e-300));
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * y.dot(&q);
            q.axpy(a - b, s, 1.0);
        }
        let mut dir = -q;
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            hist.clear();
            dir = -g.clone() / gn;
            slope = g.dot(&dir);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn = &x + &dir * step;
            if let Some((fnew, gnew)) = fg(&xn) {
                if fnew.is_finite() && fnew <= f + 1e-4 * step * slope {
                    accepted = Some((xn, fnew, gnew));
                    break;
                }
            }
            step *= 0.5;
        }
        let (xn, fnew, gnew) = match accepted {
            Some(a) => a,
            None => {
                if hist.is_empty() {
                    converged = true;
                    break;
                }
                hist.clear();
                continue;
            }
        };
        let s = &xn - &x;
        let y = &gnew - &g;
        let sy = s.dot(&y);
        if sy > 1e-16 * s.norm() * y.norm() {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        let df = (f - fnew).abs();
        x = xn;
        f = fnew;
        g = gnew;
        on_iterate(&x);
        if df <= opts.f_tol * (1.0 + f.abs()) {
            small_steps += 1;
            if small_steps >= 3 {
                converged = true;
                iterations = it + 1;
                break;
            }
        } else {
            small_steps = 0;
        }
        iterations = it + 1;
    }
    let grad_norm = g.norm();
    LbfgsResult { x, f, grad_norm, iterations, converged }
}

const INVPHI: f64 = 0.618_033_988_749_894_8;

/// Maximizer of a unimodal function on [a, b]; returns (x, f(x)).
/// Endpoints are compared too, so suprema attained at the boundary are found.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

pub fn golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), a, b, tol);
    (x, -v)
}

/// Coarse scan on `n` points followed by golden-section refinement in the
/// bracket around the best scan point. Robust for unimodal functions with
/// flat regions.
pub fn scan_golden_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize, tol: f64) -> (f64, f64) {
    let h = (b - a) / n as f64;
    let mut bi = 0;
    let mut bv = f64::INFINITY;
    for i in 0..=n {
        let v = f(a + h * i as f64);
        if v < bv {
            bv = v;
            bi = i;
        }
    }
    let lo = a + h * bi.saturating_sub(1) as f64;
    let hi = (a + h * (bi + 1) as f64).min(b);
    let (x, v) = golden_min(&f, lo, hi, tol);
    if v <= bv {
        (x, v)
    } else {
        (a + h * bi as f64, bv)
    }
}

/// Root of a function with f(lo) and f(hi) of opposite sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lbfgs_rosenbrock() {
        let fg = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = DVector::from_vec(vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]);
            Some((f, g))
        };
        let r = lbfgs(DVector::from_vec(vec![-1.2, 1.0]), fg, &LbfgsOptions { max_iter: 2000, ..Default::default() }, |_| {});
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn golden_finds_boundary_and_interior() {
        let (x, v) = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6 && v.abs() < 1e-12);
        let (x, _) = golden_max(|x| -x, 0.0, 1.0, 1e-12);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }
}
