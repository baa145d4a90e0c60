//! Matrix Dyson equation G = (z − A0 − S(G))⁻¹ for the resolvent of X_free,
//! and the density, support and moments derived from it.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::lehner::{lehner_max_operator, LehnerOptions};
use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, fro_norm, inv, lambda_max, lambda_min, ntrace, C64, CMat, ONE};
use crate::model::{CovarianceOperator, Interval, SupportSet};

#[derive(Clone, Debug, Serialize)]
pub struct MdeOptions {
    /// Residual target ‖G − Φ(G)‖_F relative to max(1, ‖Φ(G)‖_F).
    pub tol: f64,
    pub max_iter: usize,
    /// Initial damping ω in G ← (1−ω)G + ωΦ(G); halved on residual growth.
    pub omega: f64,
    /// Anderson acceleration depth (0 disables it).
    pub anderson: usize,
}

impl Default for MdeOptions {
    fn default() -> Self {
        MdeOptions { tol: 1e-10, max_iter: 20_000, omega: 0.5, anderson: 6 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MdeSolution {
    pub grid: Vec<f64>,
    pub eta: f64,
    pub density: Vec<f64>,
    pub resolvent_residuals: Vec<f64>,
}

impl MdeSolution {
    /// Trapezoidal integral of the density over the grid.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,density,residual\n");
        for ((x, r), e) in self.grid.iter().zip(&self.density).zip(&self.resolvent_residuals) {
            s.push_str(&format!("{x:.16e},{r:.16e},{e:.16e}\n"));
        }
        s
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
}

#[derive(Clone, Debug)]
pub struct Resolvent {
    pub g: CMat,
    pub residual: f64,
    pub iterations: usize,
}

struct Solver<'a> {
    op: &'a dyn CovarianceOperator,
    a0: CMat,
    scale: f64,
}

impl<'a> Solver<'a> {
    fn new(op: &'a dyn CovarianceOperator) -> Self {
        let a0 = op.mean();
        let scale = op.noise_scale().max(crate::linalg::hermitian_norm(&a0)).max(1e-12);
        Solver { op, a0, scale }
    }

    fn phi(&self, z: C64, g: &CMat) -> Option<CMat> {
        let d = self.a0.nrows();
        let m = CMat::identity(d, d) * z - &self.a0 - self.op.apply(g);
        inv(&m).ok()
    }

    /// Im G ≤ 0 up to rounding.
    fn physical(&self, g: &CMat, eta: f64) -> bool {
        let im = (g - g.adjoint()) * C64::new(0.0, -0.5);
        lambda_max(&im) <= 1e-8 / eta.max(1e-300)
    }

    /// Damped fixed point with Anderson mixing from `g`.
    fn iterate(&self, z: C64, mut g: CMat, tol: f64, max_iter: usize, opts: &MdeOptions) -> Result<Resolvent> {
        let mut omega = opts.omega;
        let mut dx: Vec<CMat> = Vec::new();
        let mut df: Vec<CMat> = Vec::new();
        let mut prev: Option<(CMat, CMat)> = None;
        let mut best = f64::INFINITY;
        let mut res = f64::INFINITY;
        for it in 0..max_iter {
            let pg = self.phi(z, &g).ok_or_else(|| Error::Singular("z − A0 − S(G) is singular".into()))?;
            let f = &pg - &g;
            res = fro_norm(&f);
            if !res.is_finite() {
                break;
            }
            // relative: near an outlier of mass 1/d, ‖G‖ ~ 1/η
            if res <= tol * fro_norm(&pg).max(1.0) {
                return Ok(Resolvent { g: pg, residual: res, iterations: it + 1 });
            }
            if res > 2.0 * best && it > 0 {
                // diverging: drop history, damp harder, restart from Φ(G)'s mix
                omega = (omega * 0.5).max(1e-3);
                dx.clear();
                df.clear();
                prev = None;
            }
            best = best.min(res);
            if let Some((px, pf)) = prev.take() {
                dx.push(&g - px);
                df.push(&f - pf);
                if dx.len() > opts.anderson {
                    dx.remove(0);
                    df.remove(0);
                }
            }
            prev = Some((g.clone(), f.clone()));
            let mut next = &g + &f * C64::new(omega, 0.0);
            if opts.anderson > 0 && !df.is_empty() {
                if let Some(gamma) = least_squares(&df, &f) {
                    for (j, gj) in gamma.iter().enumerate() {
                        next -= (&dx[j] + &df[j] * C64::new(omega, 0.0)) * *gj;
                    }
                }
            }
            g = next;
        }
        Err(Error::NoConvergence { what: "matrix Dyson equation".into(), iterations: max_iter, residual: res })
    }

    /// Newton on F(G) = Φ(G) − G with the Jacobian Δ ↦ Φ S(Δ) Φ − Δ
    /// applied matrix-free inside GMRES; backtracking on ‖F‖.
    fn newton(&self, z: C64, mut g: CMat, tol: f64) -> Result<Resolvent> {
        let mut res = f64::INFINITY;
        for it in 0..60 {
            let pg = self.phi(z, &g).ok_or_else(|| Error::Singular("z − A0 − S(G) is singular".into()))?;
            let f = &pg - &g;
            res = fro_norm(&f);
            if res <= tol * fro_norm(&pg).max(1.0) {
                return Ok(Resolvent { g: pg, residual: res, iterations: it + 1 });
            }
            let jac = |d: &CMat| &pg * self.op.apply(d) * &pg - d;
            let step = gmres(&jac, &(-&f), 1e-3 * tol.max(1e-14), 60, 8);
            let mut t = 1.0;
            loop {
                let trial = &g + &step * C64::new(t, 0.0);
                if let Some(pt) = self.phi(z, &trial) {
                    if fro_norm(&(&pt - &trial)) < (1.0 - 1e-4 * t) * res {
                        g = trial;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-6 {
                    return Err(Error::NoConvergence { what: "matrix Dyson equation".into(), iterations: it + 1, residual: res });
                }
            }
        }
        Err(Error::NoConvergence { what: "matrix Dyson equation".into(), iterations: 60, residual: res })
    }

    /// Fixed point, then Newton from the same start if that stalls.
    fn iterate_or_newton(&self, z: C64, g: CMat, tol: f64, max_iter: usize, opts: &MdeOptions) -> Result<Resolvent> {
        match self.iterate(z, g.clone(), tol, max_iter, opts) {
            Err(Error::NoConvergence { .. }) => self.newton(z, g, tol),
            r => r,
        }
    }

    /// Solve at z = x + iη: try a warm start first, then fall back to
    /// continuation in η from the noise scale down.
    fn solve(&self, z: C64, warm: Option<&CMat>, opts: &MdeOptions) -> Result<Resolvent> {
        let eta = z.im;
        if let Some(w) = warm {
            let quick = self.iterate(z, w.clone(), opts.tol, 300.min(opts.max_iter), opts).or_else(|_| self.newton(z, w.clone(), opts.tol));
            if let Ok(r) = quick {
                if self.physical(&r.g, eta) {
                    return Ok(r);
                }
            }
        }
        let d = self.a0.nrows();
        let mut stages = Vec::new();
        let mut e = eta;
        while e < 2.0 * self.scale {
            stages.push(e);
            e *= 4.0;
        }
        stages.push(e);
        stages.reverse();
        let g = CMat::identity(d, d) * (ONE / C64::new(z.re, stages[0]));
        let first_tol = if stages.len() == 1 { opts.tol } else { (opts.tol * 1e3).max(1e-8) };
        let mut r = self.iterate_or_newton(C64::new(z.re, stages[0]), g, first_tol, opts.max_iter, opts)?;
        let mut total = r.iterations;
        for w in stages.windows(2) {
            let last = w[1] == eta;
            let tol = if last { opts.tol } else { (opts.tol * 1e3).max(1e-8) };
            r = self.descend(z.re, w[0], w[1], r.g, tol, opts, 0)?;
            total += r.iterations;
        }
        Ok(Resolvent { g: r.g, residual: r.residual, iterations: total })
    }

    /// Move the solution at height `from` to height `to`, halving the step
    /// (geometrically) when the solve from the previous point fails.
    #[allow(clippy::too_many_arguments)]
    fn descend(&self, x: f64, from: f64, to: f64, g: CMat, tol: f64, opts: &MdeOptions, depth: usize) -> Result<Resolvent> {
        let cap = opts.max_iter.min(2000);
        match self.iterate_or_newton(C64::new(x, to), g.clone(), tol, cap, opts) {
            Err(e @ (Error::NoConvergence { .. } | Error::Singular(_))) => {
                if depth >= 12 {
                    return Err(e);
                }
                let mid = (from * to).sqrt();
                let loose = (opts.tol * 1e3).max(1e-8);
                let m = self.descend(x, from, mid, g, loose, opts, depth + 1)?;
                let r = self.descend(x, mid, to, m.g, tol, opts, depth + 1)?;
                Ok(Resolvent { iterations: m.iterations + r.iterations, ..r })
            }
            r => r,
        }
    }
}

fn inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Restarted GMRES for a linear map on matrices, Frobenius inner product.
fn gmres(a: &dyn Fn(&CMat) -> CMat, b: &CMat, rtol: f64, m: usize, restarts: usize) -> CMat {
    let bn = fro_norm(b);
    let mut x = CMat::zeros(b.nrows(), b.ncols());
    if bn == 0.0 {
        return x;
    }
    for _ in 0..restarts {
        let r = b - a(&x);
        let beta = fro_norm(&r);
        if beta <= rtol * bn {
            break;
        }
        let mut v = vec![&r / C64::new(beta, 0.0)];
        let mut h = DMatrix::<C64>::zeros(m + 1, m);
        let mut k = 0;
        while k < m {
            let mut w = a(&v[k]);
            for (j, vj) in v.iter().enumerate() {
                let hj = inner(vj, &w);
                h[(j, k)] = hj;
                w -= vj * hj;
            }
            let wn = fro_norm(&w);
            h[(k + 1, k)] = C64::new(wn, 0.0);
            k += 1;
            if wn <= 1e-14 * beta {
                break;
            }
            v.push(w / C64::new(wn, 0.0));
        }
        let hk = h.view((0, 0), (k + 1, k)).into_owned();
        let mut rhs = DVector::<C64>::zeros(k + 1);
        rhs[0] = C64::new(beta, 0.0);
        let y = match hk.svd(true, true).solve(&rhs, 1e-14) {
            Ok(y) => y,
            Err(_) => break,
        };
        for (j, yj) in y.iter().enumerate() {
            x += &v[j] * *yj;
        }
    }
    x
}

/// argmin_γ ‖f − Σ γ_j F_j‖ via regularized normal equations.
fn least_squares(fs: &[CMat], f: &CMat) -> Option<DVector<C64>> {
    let m = fs.len();
    let dot = |a: &CMat, b: &CMat| -> C64 { a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum() };
    let mut a = DMatrix::from_fn(m, m, |i, j| dot(&fs[i], &fs[j]));
    let trace: f64 = (0..m).map(|i| a[(i, i)].re).sum();
    for i in 0..m {
        a[(i, i)] += C64::new(1e-12 * trace.max(1e-300), 0.0);
    }
    let b = DVector::from_fn(m, |i, _| dot(&fs[i], f));
    a.lu().solve(&b)
}

/// G(z) for Im z > 0.
pub fn mde_resolvent(op: &dyn CovarianceOperator, z: C64, opts: &MdeOptions) -> Result<Resolvent> {
    if !(z.im > 0.0) {
        return Err(Error::invalid("Im z must be positive"));
    }
    Solver::new(op).solve(z, None, opts)
}

/// ρ(x) = −(1/π) Im tr G(x + iη) on `steps` + 1 equispaced points.
pub fn free_density(op: &dyn CovarianceOperator, x_lo: f64, x_hi: f64, steps: usize, eta: f64) -> Result<MdeSolution> {
    free_density_with(op, x_lo, x_hi, steps, eta, &MdeOptions::default())
}

pub fn free_density_with(op: &dyn CovarianceOperator, x_lo: f64, x_hi: f64, steps: usize, eta: f64, opts: &MdeOptions) -> Result<MdeSolution> {
    if !(eta > 0.0) {
        return Err(Error::invalid("eta must be positive"));
    }
    if !(x_hi > x_lo) || steps == 0 {
        return Err(Error::invalid("need x_lo < x_hi and steps ≥ 1"));
    }
    let grid: Vec<f64> = (0..=steps).map(|k| x_lo + (x_hi - x_lo) * k as f64 / steps as f64).collect();
    let (density, resolvent_residuals) = density_sweep(&Solver::new(op), &grid, eta, opts)?;
    Ok(MdeSolution { grid, eta, density, resolvent_residuals })
}

fn density_of(g: &CMat) -> f64 {
    (-ntrace(g).im / std::f64::consts::PI).max(0.0)
}

fn density_sweep(solver: &Solver, grid: &[f64], eta: f64, opts: &MdeOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut dens = Vec::with_capacity(grid.len());
    let mut resid = Vec::with_capacity(grid.len());
    let mut warm: Option<CMat> = None;
    for &x in grid {
        let r = solver.solve(C64::new(x, eta), warm.as_ref(), opts)?;
        dens.push(density_of(&r.g));
        resid.push(r.residual);
        warm = Some(r.g);
    }
    Ok((dens, resid))
}

/// Default support threshold: density values below 1e-3/σ count as zero.
pub fn default_threshold(op: &dyn CovarianceOperator) -> f64 {
    1e-3 / op.noise_scale().max(1e-300)
}

pub fn default_eta(op: &dyn CovarianceOperator) -> f64 {
    1e-4 * op.noise_scale().max(1e-12)
}

/// {x : ρ(x) > threshold} on a grid covering sp(A0) + 2σ[−1, 1], endpoints
/// refined by bisection to 1e-6 and components closer than 4η merged.
pub fn free_support(op: &dyn CovarianceOperator, eta: f64, threshold: f64) -> Result<SupportSet> {
    free_support_with(op, eta, threshold, 1200, &MdeOptions::default())
}

pub fn free_support_with(op: &dyn CovarianceOperator, eta: f64, threshold: f64, points: usize, opts: &MdeOptions) -> Result<SupportSet> {
    if !(eta > 0.0) || !(threshold > 0.0) {
        return Err(Error::invalid("eta and threshold must be positive"));
    }
    let solver = Solver::new(op);
    let a0 = op.mean();
    let sigma = op.noise_scale();
    let ev = eigvalsh(&a0);
    let fatten = (eta / (std::f64::consts::PI * a0.nrows() as f64 * threshold)).sqrt();
    let pad = 0.05 * (2.0 * sigma + ev[ev.len() - 1] - ev[0]) + 10.0 * eta + fatten;
    let lo = ev[0] - 2.0 * sigma - pad;
    let hi = ev[ev.len() - 1] + 2.0 * sigma + pad;
    let points = points.max(16);
    let grid: Vec<f64> = (0..=points).map(|k| lo + (hi - lo) * k as f64 / points as f64).collect();

    let mut gs: Vec<CMat> = Vec::with_capacity(grid.len());
    let mut warm: Option<CMat> = None;
    for &x in &grid {
        let r = solver.solve(C64::new(x, eta), warm.as_ref(), opts)?;
        warm = Some(r.g.clone());
        gs.push(r.g);
    }
    let above: Vec<bool> = gs.iter().map(|g| density_of(g) > threshold).collect();

    // refine a crossing between grid[k] (state a) and grid[k+1]
    let refine = |k: usize| -> Result<f64> {
        let (mut a, mut b) = (grid[k], grid[k + 1]);
        let inside_a = above[k];
        let mut warm = gs[k].clone();
        while b - a > 1e-6 {
            let m = 0.5 * (a + b);
            let r = solver.solve(C64::new(m, eta), Some(&warm), opts)?;
            if (density_of(&r.g) > threshold) == inside_a {
                a = m;
                warm = r.g;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    };

    let mut intervals = Vec::new();
    let mut start: Option<f64> = if above[0] { Some(grid[0]) } else { None };
    for k in 0..grid.len() - 1 {
        if above[k] != above[k + 1] {
            let x = refine(k)?;
            if above[k + 1] {
                start = Some(x);
            } else if let Some(s) = start.take() {
                intervals.push(Interval { lo: s, hi: x });
            }
        }
    }
    if let Some(s) = start {
        intervals.push(Interval { lo: s, hi: grid[grid.len() - 1] });
    }
    if intervals.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(SupportSet::new(intervals)?.merge_gaps(4.0 * eta))
}

/// The model −X: same covariance map, negated mean.
struct Negated<'a>(&'a dyn CovarianceOperator);

impl CovarianceOperator for Negated<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn mean(&self) -> CMat {
        -self.0.mean()
    }
    fn apply(&self, m: &CMat) -> CMat {
        self.0.apply(m)
    }
    fn apply_adjoint(&self, m: &CMat) -> CMat {
        self.0.apply_adjoint(m)
    }
    fn noise_scale(&self) -> f64 {
        self.0.noise_scale()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeCheck {
    pub support_lo: f64,
    pub support_hi: f64,
    pub lehner_min: f64,
    pub lehner_max: f64,
    pub consistent: bool,
}

/// Compare the outermost support endpoints with the Lehner values; they
/// should agree within 10η.
pub fn support_edge_check(op: &dyn CovarianceOperator, support: &SupportSet, eta: f64) -> Result<EdgeCheck> {
    let opts = LehnerOptions::default();
    let hi = match lehner_max_operator(op, &opts) {
        Ok(s) => s.value,
        Err(Error::LehnerStalled(s)) => s.value,
        Err(e) => return Err(e),
    };
    let lo = match lehner_max_operator(&Negated(op), &opts) {
        Ok(s) => -s.value,
        Err(Error::LehnerStalled(s)) => -s.value,
        Err(e) => return Err(e),
    };
    let (slo, shi) = (support.lo().ok_or(Error::EmptySet)?, support.hi().ok_or(Error::EmptySet)?);
    Ok(EdgeCheck {
        support_lo: slo,
        support_hi: shi,
        lehner_min: lo,
        lehner_max: hi,
        consistent: (slo - lo).abs() <= 10.0 * eta && (shi - hi).abs() <= 10.0 * eta,
    })
}

/// (tr ⊗ τ)[X_free^k] from the moment recursion
/// M_k = A0 M_{k−1} + Σ_{j+l=k−2} S(M_j) M_l, M_0 = 1.
pub fn free_moment(op: &dyn CovarianceOperator, k: usize) -> Result<f64> {
    if k % 2 != 0 {
        return Err(Error::invalid("moment order must be even"));
    }
    Ok(free_moments(op, k)[k])
}

/// All normalized-trace moments of orders 0..=k.
pub fn free_moments(op: &dyn CovarianceOperator, k: usize) -> Vec<f64> {
    let d = op.dim();
    let a0 = op.mean();
    let mut ms: Vec<CMat> = vec![CMat::identity(d, d)];
    let mut sm: Vec<CMat> = vec![op.apply(&ms[0])];
    for order in 1..=k {
        let mut next = &a0 * &ms[order - 1];
        if order >= 2 {
            for j in 0..=order - 2 {
                next += &sm[j] * &ms[order - 2 - j];
            }
        }
        sm.push(op.apply(&next));
        ms.push(next);
    }
    ms.iter().map(|m| ntrace(m).re).collect()
}

/// ∫ x^k ρ_η(x) dx by the trapezoid rule over sp(A0) + (2σ + pad)[−1, 1];
/// a cross-check for [`free_moment`] accurate to O(η).
pub fn free_moment_quadrature(op: &dyn CovarianceOperator, k: usize, eta: f64, steps: usize) -> Result<f64> {
    let a0 = op.mean();
    let sigma = op.noise_scale();
    let lo = lambda_min(&a0) - 2.0 * sigma - 0.1 * sigma.max(1e-3);
    let hi = lambda_max(&a0) + 2.0 * sigma + 0.1 * sigma.max(1e-3);
    let sol = free_density(op, lo, hi, steps, eta)?;
    let y: Vec<f64> = sol.grid.iter().zip(&sol.density).map(|(x, r)| x.powi(k as i32) * r).collect();
    Ok(trapezoid(&sol.grid, &y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CVec, RMat};
    use crate::model::GaussianSeriesModel;

    #[test]
    fn deterministic_resolvent() {
        let a0 = crate::linalg::to_complex(&RMat::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0]));
        let m = GaussianSeriesModel::from_dense(a0.clone(), vec![]).unwrap();
        let z = C64::new(0.3, 0.7);
        let g = mde_resolvent(&m, z, &MdeOptions::default()).unwrap().g;
        let want = inv(&(CMat::identity(2, 2) * z - a0)).unwrap();
        assert!(fro_norm(&(g - want)) < 1e-14);
    }

    #[test]
    fn semicircle_stieltjes() {
        let z = C64::new(0.0, 2.0);
        let g = mde_resolvent(&GaussianSeriesModel::semicircle(), z, &MdeOptions::default()).unwrap().g[(0, 0)];
        let want = (z - (z * z - c(4.0)).sqrt()) / 2.0;
        assert!((g - want).norm() < 1e-9);
    }

    #[test]
    fn centered_symmetry() {
        let m = GaussianSeriesModel::gue(3).unwrap();
        let z = C64::new(0.4, 0.3);
        let opts = MdeOptions::default();
        let g1 = mde_resolvent(&m, z, &opts).unwrap().g;
        let g2 = mde_resolvent(&m, -z.conj(), &opts).unwrap().g;
        assert!(fro_norm(&(g2 + g1.map(|x| x.conj()))) < 1e-8);
    }

    #[test]
    fn semicircle_density_and_mass() {
        let m = GaussianSeriesModel::semicircle();
        let s = free_density(&m, -3.0, 3.0, 2000, 1e-4).unwrap();
        assert!((s.mass() - 1.0).abs() < 1e-2, "{}", s.mass());
        let mid = s.density[1000];
        assert!((mid - 1.0 / std::f64::consts::PI).abs() < 1e-3);
        assert!(s.density.iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn semicircle_support() {
        let m = GaussianSeriesModel::semicircle();
        let s = free_support(&m, 1e-4, default_threshold(&m)).unwrap();
        assert_eq!(s.intervals().len(), 1);
        assert!((s.lo().unwrap() + 2.0).abs() < 1e-3 && (s.hi().unwrap() - 2.0).abs() < 1e-3, "{:?}", s);
    }

    #[test]
    fn moments() {
        let m = GaussianSeriesModel::semicircle();
        assert!((free_moment(&m, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!((free_moment(&m, 4).unwrap() - 2.0).abs() < 1e-12);
        assert!((free_moment(&m, 6).unwrap() - 5.0).abs() < 1e-12);
        let det = GaussianSeriesModel::from_dense(
            crate::linalg::to_complex(&RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])),
            vec![],
        )
        .unwrap();
        assert_eq!(free_moment(&det, 2).unwrap(), 1.0);
        assert!(free_moment(&m, 3).is_err());
        let q = free_moment_quadrature(&m, 4, 1e-4, 4000).unwrap();
        assert!((q - 2.0).abs() < 1e-2);
    }

    #[test]
    fn shifted_semicircle_moments() {
        // A0 = a: moments of a + s are Σ C(k, j) a^{k−j} E s^j
        let m = GaussianSeriesModel::semicircle().with_mean(CMat::from_element(1, 1, c(0.5))).unwrap();
        let mo = free_moments(&m, 4);
        let want4 = 0.5f64.powi(4) + 6.0 * 0.25 * 1.0 + 2.0;
        assert!((mo[4] - want4).abs() < 1e-12);
        let _ = CVec::zeros(1);
    }
}
