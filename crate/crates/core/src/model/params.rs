use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Coefficient, GaussianSeriesModel};
use crate::lanczos::{top_eigenpair_hermitian, top_eigenpairs, LanczosOptions};
use crate::linalg::{eigh, eigvalsh_real, lambda_max, normalize, C64, CMat, CVec, RMat};
use crate::rng::{rng_from_seed, sub_seed};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub sigma: f64,
    pub v: f64,
    pub sigma_star: f64,
    pub v_tilde: f64,
}

impl ModelParameters {
    pub fn new(sigma: f64, v: f64, sigma_star: f64) -> Self {
        ModelParameters { sigma, v, sigma_star, v_tilde: (v * sigma).sqrt() }
    }
}

#[derive(Clone, Debug)]
pub struct SigmaStarOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SigmaStarOptions {
    fn default() -> Self {
        SigmaStarOptions { restarts: 50, tol: 1e-10, max_iter: 500, seed: 0x51_9a }
    }
}

/// Above this dimension inner top-eigenvector solves use Lanczos.
const DENSE_LIMIT: usize = 128;
/// Above this many coefficients the Gram matrix is handled matrix-free.
const GRAM_DENSE_LIMIT: usize = 400;

pub fn compute_parameters(model: &GaussianSeriesModel) -> ModelParameters {
    compute_parameters_with(model, &SigmaStarOptions::default())
}

pub fn compute_parameters_with(model: &GaussianSeriesModel, opts: &SigmaStarOptions) -> ModelParameters {
    let d = model.dim();
    let sigma = if model.n() == 0 {
        0.0
    } else {
        // A_i self-adjoint, so Σ A_i*A_i = Σ A_iA_i* = S(I)
        lambda_max(&model.apply_cov(&CMat::identity(d, d))).max(0.0).sqrt()
    };
    let v = cov_norm(model).max(0.0).sqrt();
    let ss = sigma_star_alternating(model, opts);
    ModelParameters::new(sigma, v, ss)
}

/// ‖Cov(X)‖ = λ_max of the Gram matrix Tr(A_i A_j) (real for self-adjoint A_i).
fn cov_norm(model: &GaussianSeriesModel) -> f64 {
    let n = model.n();
    let d = model.dim();
    if n == 0 {
        return 0.0;
    }
    let coeffs = model.coeffs();
    if n <= GRAM_DENSE_LIMIT {
        let g = RMat::from_fn(n, n, |i, j| coeffs[i].trace_inner(&coeffs[j], d).re);
        return eigvalsh_real(&g).last().copied().unwrap_or(0.0);
    }
    let matvec = |x: &DVector<f64>, y: &mut DVector<f64>| {
        let mut acc = CMat::zeros(d, d);
        for (a, &w) in coeffs.iter().zip(x.iter()) {
            if w != 0.0 {
                a.add_scaled(w, &mut acc);
            }
        }
        for (i, a) in coeffs.iter().enumerate() {
            y[i] = a.trace_against(&acc).re;
        }
    };
    let opts = LanczosOptions { k: 1, tol: 1e-12, ..Default::default() };
    top_eigenpairs(n, matvec, &opts).map(|r| r.values[0]).unwrap_or(f64::NAN)
}

/// S(ww*) as a dense matrix.
fn rank_one_cov(model: &GaussianSeriesModel, w: &CVec) -> CMat {
    let d = model.dim();
    let mut out = CMat::zeros(d, d);
    for a in model.coeffs() {
        let aw = a.matvec(w);
        // A ww* A = (Aw)(Aw)*
        out += &aw * aw.adjoint();
    }
    out
}

fn top_vector(model: &GaussianSeriesModel, w: &CVec, seed: u64) -> (f64, CVec) {
    let d = model.dim();
    if d <= DENSE_LIMIT {
        let e = eigh(&rank_one_cov(model, w));
        return (e.max(), e.top_vector());
    }
    // S(ww*) x = Σ_i (A_i w) ⟨A_i w, x⟩
    let aws: Vec<CVec> = model.coeffs().iter().map(|a| a.matvec(w)).collect();
    let matvec = |x: &CVec, y: &mut CVec| {
        y.fill(C64::new(0.0, 0.0));
        for aw in &aws {
            let s = aw.dotc(x);
            y.axpy(s, aw, C64::new(1.0, 0.0));
        }
    };
    let opts = LanczosOptions { tol: 1e-12, seed, ..Default::default() };
    match top_eigenpair_hermitian(d, matvec, &opts) {
        Ok((val, vec, _)) => (val, vec),
        Err(_) => (0.0, w.clone()),
    }
}

/// σ*(X)² = sup_{‖u‖=‖w‖=1} Σ_i |⟨u, A_i w⟩|² by alternating maximization
/// over u and w from random complex starts. Returns σ*. Each restart yields
/// a value attained at some (u, w), so the result is a lower bound of the
/// supremum that is exact whenever one restart reaches the global maximizer.
pub fn sigma_star_alternating(model: &GaussianSeriesModel, opts: &SigmaStarOptions) -> f64 {
    if model.n() == 0 {
        return 0.0;
    }
    let d = model.dim();
    let mut best = 0.0f64;
    for r in 0..opts.restarts.max(1) {
        let mut rng = rng_from_seed(sub_seed(opts.seed, r as u64));
        let mut u = CVec::from_fn(d, |_, _| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            C64::new(a, b)
        });
        normalize(&mut u);
        let mut value = 0.0f64;
        for it in 0..opts.max_iter {
            let (_, w) = top_vector(model, &u, sub_seed(opts.seed, 1000 + it as u64));
            let (val, unew) = top_vector(model, &w, sub_seed(opts.seed, 2000 + it as u64));
            u = unew;
            let done = (val - value).abs() <= opts.tol * val.abs().max(1e-300);
            value = val;
            if done {
                break;
            }
        }
        best = best.max(value);
    }
    best.max(0.0).sqrt()
}

#[allow(dead_code)]
pub(crate) fn coefficient_dense_list(model: &GaussianSeriesModel) -> Vec<CMat> {
    model.coeffs().iter().map(|a: &Coefficient| a.to_dense(model.dim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, to_complex};

    #[test]
    fn identity_coefficient_parameters() {
        // Cov(X) = vec(I) vec(I)*, norm 2
        let m = GaussianSeriesModel::from_dense(CMat::zeros(2, 2), vec![CMat::identity(2, 2)]).unwrap();
        let p = compute_parameters(&m);
        assert!((p.sigma - 1.0).abs() < 1e-12);
        assert!((p.v - 2f64.sqrt()).abs() < 1e-12);
        assert!((p.sigma_star - 1.0).abs() < 1e-9);
        assert!((p.v_tilde.powi(2) - p.v * p.sigma).abs() < 1e-12);
    }

    #[test]
    fn single_diagonal_entry() {
        let a = to_complex(&RMat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));
        let m = GaussianSeriesModel::from_dense(CMat::zeros(2, 2), vec![a]).unwrap();
        let p = compute_parameters(&m);
        assert!((p.sigma - 2.0).abs() < 1e-12);
        assert!((p.v - 2.0).abs() < 1e-12);
        assert!((p.sigma_star - 2.0).abs() < 1e-9);
    }

    #[test]
    fn isotropic_sigma_one() {
        let p = compute_parameters(&GaussianSeriesModel::goe(5).unwrap());
        assert!((p.sigma - 1.0).abs() < 1e-12);
        assert!(p.sigma_star <= p.sigma + 1e-9 && p.sigma_star <= p.v + 1e-9);
    }

    #[test]
    fn explicit_covariance_norm() {
        // brute-force Cov(X) as a d²×d² matrix for a random model
        let model = super::super::tests::random_model(3, 4, 21);
        let d = 3;
        let dense = coefficient_dense_list(&model);
        let cov = CMat::from_fn(d * d, d * d, |p, q| dense.iter().map(|a| a[(p % d, p / d)] * a[(q % d, q / d)].conj()).sum());
        let want = crate::linalg::lambda_max(&cov);
        let p = compute_parameters(&model);
        assert!((p.v * p.v - want).abs() < 1e-9 * want);
        let _ = c(0.0);
    }

    #[test]
    fn gram_matrix_free_path() {
        // 21 × 21 band model has more coefficients than the dense limit
        let model = GaussianSeriesModel::band(41, 21).unwrap();
        assert!(model.n() > GRAM_DENSE_LIMIT);
        let v2 = cov_norm(&model);
        // independent entries: off-diagonal vec norm 2/21, diagonal 1/21
        assert!((v2 - 2.0 / 21.0).abs() < 1e-10, "{v2}");
    }
}
