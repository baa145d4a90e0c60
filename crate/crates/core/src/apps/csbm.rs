//! Gaussian contextual block model: a spiked Wigner matrix A and a
//! rectangular side channel Y sharing the signal v, combined into the
//! (n+p)-dimensional matrix X̂ whose top eigenvector estimates v.

use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanczos::{top_eigenpairs, LanczosOptions};
use crate::linalg::{eigh_real, RMat};
use crate::rng::{rng_from_seed, sub_seed};

/// Largest n + p for which X̂ is formed densely.
pub const CSBM_DENSE_MAX_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsbmInstance {
    pub n: usize,
    pub p: usize,
    pub lambda: f64,
    pub mu: f64,
    pub v: Vec<i8>,
    pub seed: u64,
}

impl CsbmInstance {
    pub fn new(n: usize, p: usize, lambda: f64, mu: f64, seed: u64) -> Result<Self> {
        let mut r = rng_from_seed(sub_seed(seed, 0));
        let v = (0..n).map(|_| if r.random::<bool>() { 1 } else { -1 }).collect();
        Self::with_signal(n, p, lambda, mu, v, seed)
    }

    pub fn with_signal(n: usize, p: usize, lambda: f64, mu: f64, v: Vec<i8>, seed: u64) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::invalid("n and p must be positive"));
        }
        if !(lambda >= 0.0 && mu >= 0.0 && lambda.is_finite() && mu.is_finite()) {
            return Err(Error::invalid("lambda and mu must be finite and nonnegative"));
        }
        if v.len() != n || v.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("v must be a ±1 vector of length n"));
        }
        Ok(CsbmInstance { n, p, lambda, mu, v, seed })
    }

    pub fn gamma(&self) -> f64 {
        self.n as f64 / self.p as f64
    }

    fn v_vec(&self) -> DVector<f64> {
        DVector::from_iterator(self.n, self.v.iter().map(|&s| s as f64))
    }
}

/// A = (λ/n)vvᵀ + G and Y = √(μ/n)uvᵀ + H.
#[derive(Clone, Debug)]
pub struct CsbmOperator {
    pub a: RMat,
    pub y: RMat,
    pub u: DVector<f64>,
    lambda: f64,
    mu: f64,
}

pub fn csbm_sample(inst: &CsbmInstance) -> CsbmOperator {
    let (n, p) = (inst.n, inst.p);
    let v = inst.v_vec();
    let mut r = rng_from_seed(sub_seed(inst.seed, 1));
    let mut a = &v * v.transpose() * (inst.lambda / n as f64);
    for j in 0..n {
        for i in 0..=j {
            let g: f64 = StandardNormal.sample(&mut r);
            let s = if i == j { (2.0 / n as f64).sqrt() } else { (1.0 / n as f64).sqrt() };
            a[(i, j)] += g * s;
            if i != j {
                a[(j, i)] += g * s;
            }
        }
    }
    let u = DVector::from_fn(p, |_, _| {
        let g: f64 = StandardNormal.sample(&mut r);
        g / (p as f64).sqrt()
    });
    let mut y = &u * v.transpose() * (inst.mu / n as f64).sqrt();
    let hs = 1.0 / (p as f64).sqrt();
    for x in y.iter_mut() {
        let g: f64 = StandardNormal.sample(&mut r);
        *x += g * hs;
    }
    CsbmOperator { a, y, u, lambda: inst.lambda, mu: inst.mu }
}

impl CsbmOperator {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn p(&self) -> usize {
        self.y.nrows()
    }

    fn coupling(&self) -> f64 {
        (self.mu * self.p() as f64 / self.n() as f64).sqrt()
    }

    fn shift(&self) -> f64 {
        self.lambda * self.lambda + self.mu * self.p() as f64 / self.n() as f64
    }

    /// X̂ applied to x without forming it.
    pub fn matvec(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        let n = self.n();
        let x1 = x.rows(0, n);
        let x2 = x.rows(n, self.p());
        let s = self.coupling();
        let mut top = &self.a * x1 * self.lambda - x1 * self.shift();
        top.gemv_tr(s, &self.y, &x2, 1.0);
        let mut bottom = &x2 * -self.mu;
        bottom.gemv(s, &self.y, &x1, 1.0);
        out.rows_mut(0, n).copy_from(&top);
        out.rows_mut(n, self.p()).copy_from(&bottom);
    }

    /// [[λA − (λ² + μp/n)1, √(μp/n)Yᵀ], [√(μp/n)Y, −μ1]].
    pub fn x_hat(&self) -> Result<RMat> {
        let (n, p) = (self.n(), self.p());
        if n + p > CSBM_DENSE_MAX_DIM {
            return Err(Error::MemoryCap(format!("dense X̂ of dimension {} exceeds {CSBM_DENSE_MAX_DIM}", n + p)));
        }
        let s = self.coupling();
        let mut x = RMat::zeros(n + p, n + p);
        let mut tl = &self.a * self.lambda;
        for i in 0..n {
            tl[(i, i)] -= self.shift();
        }
        x.view_mut((0, 0), (n, n)).copy_from(&tl);
        x.view_mut((n, 0), (p, n)).copy_from(&(&self.y * s));
        x.view_mut((0, n), (n, p)).copy_from(&(self.y.transpose() * s));
        for i in 0..p {
            x[(n + i, n + i)] = -self.mu;
        }
        Ok(x)
    }

    /// Top eigenvector of X̂ by Lanczos, restricted to the first n entries.
    pub fn estimate(&self) -> Result<CsbmEstimate> {
        let opts = LanczosOptions { k: 2, tol: 1e-9, seed: 0xc5b3, ..Default::default() };
        let top = top_eigenpairs(self.n() + self.p(), |x, y| self.matvec(x, y), &opts)?;
        let gap = if top.values.len() > 1 { top.values[0] - top.values[1] } else { f64::INFINITY };
        Ok(CsbmEstimate { v_hat: top.vectors[0].rows(0, self.n()).into_owned(), lambda_max: top.values[0], gap, degenerate: gap < 1e-12 })
    }
}

pub struct CsbmMatrices {
    pub a: RMat,
    pub y: RMat,
    pub x_hat: RMat,
}

pub fn csbm_build(inst: &CsbmInstance) -> Result<CsbmMatrices> {
    if inst.n + inst.p > CSBM_DENSE_MAX_DIM {
        return Err(Error::MemoryCap(format!("dense X̂ of dimension {} exceeds {CSBM_DENSE_MAX_DIM}", inst.n + inst.p)));
    }
    let op = csbm_sample(inst);
    let x_hat = op.x_hat()?;
    Ok(CsbmMatrices { a: op.a, y: op.y, x_hat })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CsbmSnr {
    pub snr: f64,
    pub supercritical: bool,
    /// snr > 1 and λ² + μ²/γ > 1 give the same answer (up to 1e-12 at the
    /// boundary).
    pub criteria_agree: bool,
}

pub fn csbm_snr(lambda: f64, mu: f64, gamma: f64) -> Result<CsbmSnr> {
    if !(lambda >= 0.0 && mu >= 0.0 && gamma > 0.0) {
        return Err(Error::invalid("need λ, μ ≥ 0 and γ > 0"));
    }
    let l2 = lambda * lambda;
    let snr = 0.5 * (l2 + (l2 * l2 + 4.0 * mu * mu / gamma).sqrt());
    let s = l2 + mu * mu / gamma;
    let supercritical = s > 1.0;
    Ok(CsbmSnr { snr, supercritical, criteria_agree: (snr > 1.0) == supercritical || (snr - 1.0).abs() < 1e-12 })
}

#[derive(Clone, Debug)]
pub struct CsbmEstimate {
    pub v_hat: DVector<f64>,
    pub lambda_max: f64,
    pub gap: f64,
    /// Top gap below 1e-12: the eigenvector is not determined.
    pub degenerate: bool,
}

/// Dense path: top eigenvector of X̂, first n coordinates.
pub fn csbm_estimate(x_hat: &RMat, n: usize) -> Result<CsbmEstimate> {
    let d = x_hat.nrows();
    if x_hat.ncols() != d || n > d {
        return Err(Error::dim("X̂ must be square with at least n rows"));
    }
    let (vals, vecs) = eigh_real(x_hat);
    let gap = if d > 1 { vals[d - 1] - vals[d - 2] } else { f64::INFINITY };
    Ok(CsbmEstimate { v_hat: vecs.column(d - 1).rows(0, n).into_owned(), lambda_max: vals[d - 1], gap, degenerate: gap < 1e-12 })
}

/// (1/n)|⟨v, v̂⟩|².
pub fn csbm_overlap(v: &[i8], v_hat: &DVector<f64>) -> f64 {
    super::decode::label_overlap(v, v_hat)
}
