//! λ_max(X_free) = inf_{M>0} λ_max(A0 + M⁻¹ + S(M)).
//!
//! The objective is convex in M but not smooth. We minimize the
//! log-sum-exp smoothing T·log Tr exp(Y/T) over M = exp(H) with L-BFGS,
//! lowering T geometrically, keep the best exact value seen at any iterate,
//! and finally try a few fixed-point sweeps of the stationarity condition
//! M S*(P) M = P.

use nalgebra::DVector;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{eigh, exp_divided_differences, fro_norm, geometric_mean, hermitian_part, inv_hpd, lambda_max, C64, CMat};
use crate::model::{CovarianceOperator, GaussianSeriesModel};
use crate::optim::{lbfgs, LbfgsOptions};

#[derive(Clone, Debug, Serialize)]
pub struct LehnerOptions {
    /// Absolute accuracy target for the value.
    pub tol: f64,
    /// Total L-BFGS iterations across all temperature stages.
    pub max_iter: usize,
    /// Initial and final smoothing temperatures, relative to the noise scale.
    pub t_start: f64,
    pub t_end: f64,
    pub polish_sweeps: usize,
}

impl Default for LehnerOptions {
    fn default() -> Self {
        LehnerOptions { tol: 1e-8, max_iter: 6000, t_start: 1e-1, t_end: 1e-6, polish_sweeps: 5 }
    }
}

#[derive(Clone, Debug)]
pub struct LehnerSolution {
    pub value: f64,
    pub minimizer: CMat,
    pub iterations: usize,
    /// Decrease of the best value during the last temperature stage and
    /// polish; small when the iteration has settled.
    pub objective_residual: f64,
    /// Relative Frobenius residual of S*(P) = M⁻¹PM⁻¹ at the smallest
    /// temperature, P the smoothed top-eigenspace density.
    pub kkt_residual: f64,
    /// Best exact value after each accepted iterate (nonincreasing).
    pub history: Vec<f64>,
    pub converged: bool,
}

impl LehnerSolution {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "value": self.value,
            "iterations": self.iterations,
            "objective_residual": self.objective_residual,
            "kkt_residual": self.kkt_residual,
            "converged": self.converged,
            "dim": self.minimizer.nrows(),
            "minimizer": crate::model::io::matrix_value(&self.minimizer),
        })
    }
}

/// Isometric coordinates for self-adjoint matrices (real symmetric when
/// `real`), so that Euclidean inner products equal Re Tr(XY).
struct HermCoords {
    d: usize,
    real: bool,
}

impl HermCoords {
    fn len(&self) -> usize {
        let off = self.d * (self.d - 1) / 2;
        self.d + if self.real { off } else { 2 * off }
    }

    fn to_vec(&self, h: &CMat) -> DVector<f64> {
        let d = self.d;
        let mut x = DVector::zeros(self.len());
        let mut k = d;
        let r2 = std::f64::consts::SQRT_2;
        for i in 0..d {
            x[i] = h[(i, i)].re;
            for j in i + 1..d {
                x[k] = r2 * h[(i, j)].re;
                k += 1;
                if !self.real {
                    x[k] = r2 * h[(i, j)].im;
                    k += 1;
                }
            }
        }
        x
    }

    fn to_mat(&self, x: &DVector<f64>) -> CMat {
        let d = self.d;
        let mut h = CMat::zeros(d, d);
        let mut k = d;
        let s = 1.0 / std::f64::consts::SQRT_2;
        for i in 0..d {
            h[(i, i)] = C64::new(x[i], 0.0);
            for j in i + 1..d {
                let re = s * x[k];
                k += 1;
                let im = if self.real {
                    0.0
                } else {
                    k += 1;
                    s * x[k - 1]
                };
                h[(i, j)] = C64::new(re, im);
                h[(j, i)] = C64::new(re, -im);
            }
        }
        h
    }
}

fn operator_is_real(op: &dyn CovarianceOperator) -> bool {
    let d = op.dim();
    let mean_real = op.mean().iter().all(|z| z.im == 0.0);
    if !mean_real {
        return false;
    }
    // S maps real symmetric matrices to real matrices iff it does so on a
    // generic real symmetric probe
    let probe = CMat::from_fn(d, d, |i, j| C64::new(1.0 + ((i * 7 + j * 7) % 5) as f64 + (i + j) as f64 * 0.1, 0.0));
    let s = op.apply(&hermitian_part(&probe));
    s.iter().all(|z| z.im.abs() <= 1e-14 * (1.0 + z.re.abs()))
}

struct Eval {
    exact: f64,
    smooth: f64,
    grad_h: CMat,
    m: CMat,
    kkt: f64,
}

fn evaluate(op: &dyn CovarianceOperator, a0: &CMat, h: &CMat, temp: f64) -> Option<Eval> {
    let eh = eigh(h);
    if eh.values.iter().any(|x| !x.is_finite() || x.abs() > 600.0) {
        return None;
    }
    let m = eh.apply(f64::exp);
    let minv = eh.apply(|x| (-x).exp());
    let y = hermitian_part(&(a0 + &minv + op.apply(&m)));
    let ey = eigh(&y);
    let ymax = ey.max();
    if !ymax.is_finite() {
        return None;
    }
    let w: Vec<f64> = ey.values.iter().map(|&v| ((v - ymax) / temp).exp()).collect();
    let z: f64 = w.iter().sum();
    let smooth = ymax + temp * z.ln();
    let p = ey.apply_weights(&w, z);
    let sp = op.apply_adjoint(&p);
    let mpm = &minv * &p * &minv;
    let gm = hermitian_part(&(&sp - &mpm));
    let kkt = fro_norm(&gm) / fro_norm(&sp).max(fro_norm(&mpm)).max(1e-300);
    // chain rule through exp: dM = U (Γ ∘ (U* dH U)) U*
    let gamma = exp_divided_differences(&eh.values);
    let u = &eh.vectors;
    let mut inner = u.adjoint() * gm * u;
    for ((i, j), g) in gamma.iter().enumerate().map(|(k, g)| ((k % gamma.nrows(), k / gamma.nrows()), g)) {
        inner[(i, j)] *= *g;
    }
    let grad_h = hermitian_part(&(u * inner * u.adjoint()));
    Some(Eval { exact: ymax, smooth, grad_h, m, kkt })
}

trait Weights {
    fn apply_weights(&self, w: &[f64], z: f64) -> CMat;
}

impl Weights for crate::linalg::Eigh {
    fn apply_weights(&self, w: &[f64], z: f64) -> CMat {
        let mut scaled = self.vectors.clone();
        for (j, &wj) in w.iter().enumerate() {
            scaled.column_mut(j).scale_mut(wj / z);
        }
        scaled * self.vectors.adjoint()
    }
}

/// Exact Lehner objective λ_max(A0 + M⁻¹ + S(M)) at a positive definite M.
pub fn lehner_objective(op: &dyn CovarianceOperator, m: &CMat) -> Result<f64> {
    let minv = inv_hpd(m)?;
    Ok(lambda_max(&hermitian_part(&(op.mean() + minv + op.apply(m)))))
}

/// Minimize the Lehner objective for an arbitrary mean and covariance map.
pub fn lehner_max_operator(op: &dyn CovarianceOperator, opts: &LehnerOptions) -> Result<LehnerSolution> {
    let d = op.dim();
    let scale = op.noise_scale();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::invalid("covariance map vanishes; the Lehner infimum is not attained"));
    }
    let a0 = hermitian_part(&op.mean());
    let coords = HermCoords { d, real: operator_is_real(op) };

    let mut h = CMat::identity(d, d) * C64::new(-scale.ln(), 0.0);
    let mut best_val = f64::INFINITY;
    let mut best_m = CMat::identity(d, d) * C64::new(1.0 / scale, 0.0);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut last_kkt = f64::NAN;

    let mut temps = Vec::new();
    let mut t = opts.t_start * scale;
    while t > opts.t_end * scale * 1.000001 {
        temps.push(t);
        t *= 0.1;
    }
    temps.push(opts.t_end * scale);
    let per_stage = (opts.max_iter / temps.len()).max(10);
    let mut stage_start_best = f64::INFINITY;

    for (si, &temp) in temps.iter().enumerate() {
        let last_stage = si + 1 == temps.len();
        stage_start_best = best_val;
        let lopts = LbfgsOptions { memory: 15, max_iter: per_stage, grad_tol: 1e-11 * scale, f_tol: 1e-16 };
        let mut track = |e: &Eval, hist: &mut Vec<f64>| {
            if e.exact < best_val {
                best_val = e.exact;
                best_m = e.m.clone();
            }
            hist.push(best_val);
        };
        let mut stage_hist = Vec::new();
        let mut last_eval_kkt = f64::NAN;
        let res = lbfgs(
            coords.to_vec(&h),
            |x| {
                let e = evaluate(op, &a0, &coords.to_mat(x), temp)?;
                track(&e, &mut stage_hist);
                last_eval_kkt = e.kkt;
                Some((e.smooth, coords.to_vec(&e.grad_h)))
            },
            &lopts,
            |_| {},
        );
        history.extend(stage_hist);
        iterations += res.iterations;
        h = coords.to_mat(&res.x);
        if let Some(e) = evaluate(op, &a0, &h, temp) {
            last_kkt = e.kkt;
        } else {
            last_kkt = last_eval_kkt;
        }
        if last_stage {
            converged = res.converged;
        }
    }

    // fixed-point sweeps M ← S*(P)⁻¹ # P at the final temperature
    let temp = *temps.last().unwrap();
    let mut m = best_m.clone();
    for _ in 0..opts.polish_sweeps {
        let ey = eigh(&hermitian_part(&(&a0 + inv_hpd(&m)? + op.apply(&m))));
        let ymax = ey.max();
        let w: Vec<f64> = ey.values.iter().map(|&v| ((v - ymax) / temp).exp()).collect();
        let z: f64 = w.iter().sum();
        let p = ey.apply_weights(&w, z);
        let sp = hermitian_part(&op.apply_adjoint(&p));
        let next = match inv_hpd(&sp).and_then(|spi| geometric_mean(&spi, &p)) {
            Ok(x) => x,
            Err(_) => break,
        };
        match lehner_objective(op, &next) {
            Ok(v) if v < best_val => {
                best_val = v;
                best_m = next.clone();
                history.push(best_val);
                m = next;
            }
            _ => break,
        }
    }

    let objective_residual = if stage_start_best.is_finite() { (stage_start_best - best_val).max(0.0) } else { 0.0 };
    let sol = LehnerSolution {
        value: best_val,
        minimizer: best_m,
        iterations,
        objective_residual,
        kkt_residual: last_kkt,
        history,
        converged: converged || objective_residual <= opts.tol,
    };
    if sol.converged {
        Ok(sol)
    } else {
        Err(Error::LehnerStalled(Box::new(sol)))
    }
}

/// λ_max(X_free).
pub fn lehner_max(model: &GaussianSeriesModel, opts: &LehnerOptions) -> Result<LehnerSolution> {
    if model.n() == 0 {
        return Err(Error::invalid("the Lehner formula needs at least one coefficient"));
    }
    lehner_max_operator(model, opts)
}

/// λ_min(X_free) = −λ_max((−X)_free).
pub fn lehner_min(model: &GaussianSeriesModel, opts: &LehnerOptions) -> Result<LehnerSolution> {
    let mut s = lehner_max(&model.negated(), opts)?;
    s.value = -s.value;
    for h in &mut s.history {
        *h = -*h;
    }
    Ok(s)
}
