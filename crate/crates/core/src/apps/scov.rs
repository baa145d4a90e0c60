//! Sample covariance Σ̂ = XXᵀ/n for Σ = λvvᵀ + 1: the limits of ‖Σ̂‖ and
//! of the extreme eigenvalues of Σ̂ − Σ in three equivalent forms.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigvalsh_real, RMat};
use crate::optim::{bisect, golden_max, scan_golden_min};
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScovParams {
    pub n: usize,
    pub p: usize,
    pub lambda: f64,
    pub delta: f64,
}

impl ScovParams {
    pub fn new(n: usize, p: usize, lambda: f64) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::invalid("n and p must be positive"));
        }
        check(lambda, 1.0)?;
        Ok(ScovParams { n, p, lambda, delta: p as f64 / n as f64 })
    }
}

/// (S, H₊, H₋): limits of ‖Σ̂‖, λmax(Σ̂ − Σ), λmin(Σ̂ − Σ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScovValues {
    pub s: f64,
    pub h_plus: f64,
    pub h_minus: f64,
}

fn check(lambda: f64, delta: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("need λ ≥ 0 and δ > 0, got λ = {lambda}, δ = {delta}")));
    }
    Ok(())
}

pub fn scov_closed_forms(lambda: f64, delta: f64) -> Result<ScovValues> {
    check(lambda, delta)?;
    let sd = delta.sqrt();
    let s = if lambda <= sd { (1.0 + sd).powi(2) } else { (1.0 + lambda) * (1.0 + delta / lambda) };
    let root = (delta + 4.0 * lambda).sqrt();
    let h_plus = if lambda <= 1.0 + sd { delta + 2.0 * sd } else { (1.0 + lambda) / (2.0 * lambda) * (sd + root) * sd };
    // (√δ − √(δ+4λ)) = −4λ/(√δ + √(δ+4λ)), finite at λ = 0
    let h_minus = if lambda <= 1.0 - sd { delta - 2.0 * sd } else { -2.0 * (1.0 + lambda) * sd / (sd + root) };
    Ok(ScovValues { s, h_plus, h_minus })
}

/// φ(u, v) = inf_{a>0} {a u/(1+a) + v/a}.
fn phi(u: f64, v: f64) -> f64 {
    if v < u {
        2.0 * (u * v).sqrt() - v
    } else {
        u
    }
}

/// Suprema over π ∈ [0, 1] of the minimax forms, by golden section.
pub fn scov_pi_forms(lambda: f64, delta: f64) -> Result<ScovValues> {
    check(lambda, delta)?;
    let root = |pi: f64| ((1.0 - pi) * delta).sqrt() + (1.0 + pi * lambda).sqrt();
    let tol = 1e-12;
    let (_, s) = golden_max(|pi| root(pi).powi(2), 0.0, 1.0, tol);
    let (_, h_plus) = golden_max(|pi| root(pi).powi(2) - (1.0 + pi * lambda), 0.0, 1.0, tol);
    let (_, neg) = golden_max(|pi| phi(1.0 + pi * lambda, (1.0 - pi) * delta), 0.0, 1.0, tol);
    Ok(ScovValues { s, h_plus, h_minus: -neg })
}

/// For fixed a: inf over the simplex of max_i {α_i/x_i + β_i} with
/// α_i = μ_i/(na), β_i = gμ_i, i.e. the t > max β solving Σ α_i/(t − β_i) = 1.
fn simplex_value(mu: &[(f64, usize)], n: f64, a: f64, g: f64) -> f64 {
    let beta_max = mu.iter().map(|&(m, _)| g * m).fold(f64::MIN, f64::max);
    let alpha_sum: f64 = mu.iter().map(|&(m, k)| k as f64 * m / (n * a)).sum();
    let f = |t: f64| mu.iter().map(|&(m, k)| k as f64 * m / (n * a * (t - g * m))).sum::<f64>() - 1.0;
    let (lo, hi) = (beta_max, beta_max + alpha_sum);
    bisect(f, lo, hi, 1e-15 * hi.abs().max(1.0))
}

/// The three variational formulas over (a, x) for the spectrum `mu` of Σ
/// and n samples, exact at finite p. Minimization in a is a scan followed
/// by golden section.
pub fn scov_variational(mu: &[f64], n: usize) -> Result<ScovValues> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if mu.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
        return Err(Error::invalid("spectrum must be finite and nonnegative"));
    }
    // group equal eigenvalues; zero ones do not contribute
    let mut sorted: Vec<f64> = mu.iter().copied().filter(|&m| m > 0.0).collect();
    if sorted.is_empty() {
        return Err(Error::invalid("spectrum is zero"));
    }
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for m in sorted {
        match groups.last_mut() {
            Some((v, k)) if *v == m => *k += 1,
            _ => groups.push((m, 1)),
        }
    }
    let n = n as f64;
    let eps = 1e-10;
    let tol = 1e-13;
    let over_unit = |g: &dyn Fn(f64) -> f64| scan_golden_min(|a| simplex_value(&groups, n, a, g(a)), eps, 1.0 - eps, 400, tol).1;
    let s = over_unit(&|a| 1.0 / (1.0 - a));
    let h_plus = over_unit(&|a| a / (1.0 - a));
    // a ∈ (0, ∞) through a = s/(1 − s)
    let neg = scan_golden_min(
        |s| {
            let a = s / (1.0 - s);
            simplex_value(&groups, n, a, a / (1.0 + a))
        },
        eps,
        1.0 - eps,
        400,
        tol,
    )
    .1;
    Ok(ScovValues { s, h_plus, h_minus: -neg })
}

/// Spectrum of Σ = λvvᵀ + 1_p.
pub fn spiked_spectrum(p: usize, lambda: f64) -> Vec<f64> {
    let mut mu = vec![1.0; p];
    if p > 0 {
        mu[0] += lambda;
    }
    mu
}

/// Observed (‖Σ̂‖, λmax(Σ̂ − Σ), λmin(Σ̂ − Σ)) for one draw. Columns are
/// N(0, Σ) with v = e₁; the law of the three statistics does not depend on v.
pub fn scov_sample(params: &ScovParams, seed: u64) -> ScovValues {
    let (n, p) = (params.n, params.p);
    let mut r = rng_from_seed(seed);
    let top = (1.0 + params.lambda).sqrt();
    let x = RMat::from_fn(p, n, |i, _| {
        let g: f64 = StandardNormal.sample(&mut r);
        if i == 0 {
            g * top
        } else {
            g
        }
    });
    let mut hat = &x * x.transpose() / n as f64;
    let norm = *eigvalsh_real(&hat).last().expect("p ≥ 1");
    hat[(0, 0)] -= 1.0 + params.lambda;
    for i in 1..p {
        hat[(i, i)] -= 1.0;
    }
    let e = eigvalsh_real(&hat);
    ScovValues { s: norm, h_plus: e[p - 1], h_minus: e[0] }
}
