//! Isotropic outlier laws: the BBP function B(θ), the overlap (1 − 1/θ²)_+,
//! and finite-matrix tools for checking them.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigh, eigvalsh, fro_norm, hermitian_deviation, hermitian_norm, lambda_max, CMat, CVec, Eigh};
use crate::model::{compute_parameters, GaussianSeriesModel};
use crate::rng::sub_seed;

/// B(θ) = 2 for θ ≤ 1, θ + 1/θ above.
pub fn bbp_value(theta: f64) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(Error::invalid(format!("theta must be nonnegative, got {theta}")));
    }
    Ok(if theta <= 1.0 { 2.0 } else { theta + 1.0 / theta })
}

pub fn bbp_overlap(theta: f64) -> f64 {
    if theta <= 1.0 {
        0.0
    } else {
        1.0 - 1.0 / (theta * theta)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BbpPrediction {
    pub theta: f64,
    pub value: f64,
    pub error_radius: f64,
    pub rank: usize,
    pub isotropy_defect: f64,
    /// σ*√r ≤ 1.
    pub applicable: bool,
    /// isotropy_defect ≤ 1e-8.
    pub isotropic: bool,
}

/// Eigenvalues of a self-adjoint matrix with |λ| > 1e-10‖A‖.
pub fn numerical_rank(a: &CMat) -> usize {
    let e = eigvalsh(a);
    let norm = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if norm == 0.0 {
        return 0;
    }
    e.iter().filter(|x| x.abs() > 1e-10 * norm).count()
}

pub fn bbp_window(model: &GaussianSeriesModel) -> BbpPrediction {
    let d = model.dim();
    let defect = hermitian_norm(&(model.apply_cov(&CMat::identity(d, d)) - CMat::identity(d, d)));
    let theta = lambda_max(model.a0()).max(0.0);
    let rank = numerical_rank(model.a0());
    let p = compute_parameters(model);
    let reach = p.sigma_star * (rank as f64).sqrt();
    BbpPrediction {
        theta,
        value: bbp_value(theta).unwrap_or(2.0),
        error_radius: 2.0 * reach,
        rank,
        isotropy_defect: defect,
        applicable: reach <= 1.0,
        isotropic: defect <= 1e-8,
    }
}

/// (σ*² r ‖M‖, ‖S(M)‖) for self-adjoint M of numerical rank r.
pub fn srank_bound_check(model: &GaussianSeriesModel, m: &CMat) -> Result<(f64, f64)> {
    if m.shape() != (model.dim(), model.dim()) {
        return Err(Error::dim("M does not match the model dimension"));
    }
    if hermitian_deviation(m) > 1e-12 * fro_norm(m).max(1.0) {
        return Err(Error::NotSelfAdjoint(hermitian_deviation(m)));
    }
    let r = numerical_rank(m) as f64;
    let ss = compute_parameters(model).sigma_star;
    Ok((ss * ss * r * hermitian_norm(m), hermitian_norm(&model.apply_cov(m))))
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbOverlap {
    pub lower: f64,
    pub point: f64,
    pub upper: f64,
    /// Top eigenvalue gap below 1e-12; the eigenvector is then arbitrary.
    pub degenerate: bool,
}

fn check_projection(p: &CMat) -> Result<()> {
    let dev = fro_norm(&(p * p - p)) + hermitian_deviation(p);
    if dev > 1e-10 * fro_norm(p).max(1.0) {
        return Err(Error::invalid(format!("P is not an orthogonal projection (defect {dev:.3e})")));
    }
    Ok(())
}

fn top_gap(e: &Eigh) -> f64 {
    let n = e.values.len();
    if n < 2 {
        f64::INFINITY
    } else {
        e.values[n - 1] - e.values[n - 2]
    }
}

fn quad_form(p: &CMat, v: &CVec) -> f64 {
    v.dotc(&(p * v)).re
}

/// (λmax(X) − λmax(X − tP))/t ≤ ⟨v, Pv⟩ ≤ (λmax(X + tP) − λmax(X))/t for
/// the top eigenvector v of X.
pub fn perturb_overlap(x: &CMat, p: &CMat, t: f64) -> Result<PerturbOverlap> {
    if !(t > 0.0) {
        return Err(Error::invalid("t must be positive"));
    }
    if x.shape() != p.shape() || x.nrows() != x.ncols() {
        return Err(Error::dim("X and P must be square of equal size"));
    }
    if hermitian_deviation(x) > 1e-12 * fro_norm(x).max(1.0) {
        return Err(Error::NotSelfAdjoint(hermitian_deviation(x)));
    }
    check_projection(p)?;
    let e = eigh(x);
    let l0 = e.max();
    let tp = p * crate::linalg::c(t);
    Ok(PerturbOverlap {
        lower: (l0 - lambda_max(&(x - &tp))) / t,
        point: quad_form(p, &e.top_vector()),
        upper: (lambda_max(&(x + &tp)) - l0) / t,
        degenerate: top_gap(&e) < 1e-12,
    })
}

/// Spectral projection of a self-adjoint matrix onto eigenvalues in (lo, hi].
pub fn spectral_projection(a: &CMat, lo: f64, hi: f64) -> CMat {
    let e = eigh(a);
    e.apply(|x| if x > lo && x <= hi { 1.0 } else { 0.0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapEstimate {
    pub trials: usize,
    pub overlaps: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub theory: f64,
    /// max over trials and s ∈ {0, ±t} of |λmax(X_s) − B(λmax(E X_s))|.
    pub epsilon: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub degenerate: usize,
}

/// Sample X with mean EX, let P = 1_(θ−δ, θ](EX) and evaluate the three
/// perturbations X + sP, s ∈ {0, ±t}. `sampler(seed)` returns (X, EX).
pub fn three_point_overlap<F>(sampler: F, theta: f64, delta: f64, t: f64, trials: usize, seed: u64) -> Result<OverlapEstimate>
where
    F: Fn(u64) -> Result<(CMat, CMat)> + Sync,
{
    if !(t > 0.0) || t > delta {
        return Err(Error::invalid("need 0 < t ≤ delta"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    let results: Vec<Result<(f64, f64, bool)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let (x, ex) = sampler(sub_seed(seed, k as u64))?;
            let p = spectral_projection(&ex, theta - delta, theta);
            let mut eps = 0.0f64;
            let mut point = None;
            let mut degenerate = false;
            for s in [-t, 0.0, t] {
                let sp = &p * crate::linalg::c(s);
                let xs = &x + &sp;
                let b = bbp_value(lambda_max(&(&ex + &sp)).max(0.0))?;
                let lm = if s == 0.0 {
                    let e = eigh(&xs);
                    point = Some(quad_form(&p, &e.top_vector()));
                    degenerate = top_gap(&e) < 1e-12;
                    e.max()
                } else {
                    lambda_max(&xs)
                };
                eps = eps.max((lm - b).abs());
            }
            Ok((point.unwrap_or(0.0), eps, degenerate))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let overlaps: Vec<f64> = results.iter().map(|r| r.0).collect();
    let epsilon = results.iter().fold(0.0f64, |m, r| m.max(r.1));
    let n = overlaps.len() as f64;
    let mean = overlaps.iter().sum::<f64>() / n;
    let std = if overlaps.len() > 1 { (overlaps.iter().map(|o| (o - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    let theory = bbp_overlap(theta);
    let slack = t + 2.0 * epsilon / t;
    Ok(OverlapEstimate {
        trials,
        overlaps,
        mean,
        std,
        theory,
        epsilon,
        band_lo: theory - slack,
        band_hi: theory + slack,
        degenerate: results.iter().filter(|r| r.2).count(),
    })
}

/// Keep the r eigenpairs of largest |λ|; returns (A_r, s_{r+1}).
pub fn low_rank_split(a: &CMat, r: usize) -> Result<(CMat, f64)> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim("matrix is not square"));
    }
    if hermitian_deviation(a) > 1e-12 * fro_norm(a).max(1.0) {
        return Err(Error::NotSelfAdjoint(hermitian_deviation(a)));
    }
    let e = eigh(a);
    let mut order: Vec<usize> = (0..e.values.len()).collect();
    order.sort_by(|&i, &j| e.values[j].abs().total_cmp(&e.values[i].abs()));
    let d = a.nrows();
    let mut ar = CMat::zeros(d, d);
    for &k in order.iter().take(r) {
        let v = e.vectors.column(k);
        ar += (&v * v.adjoint()) * crate::linalg::c(e.values[k]);
    }
    let tail = order.get(r).map(|&k| e.values[k].abs()).unwrap_or(0.0);
    Ok((ar, tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, to_complex, RMat};
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> CMat {
        to_complex(&RMat::from_diagonal(&DVector::from_row_slice(v)))
    }

    #[test]
    fn bbp_function() {
        assert_eq!(bbp_value(0.5).unwrap(), 2.0);
        assert_eq!(bbp_value(1.0).unwrap(), 2.0);
        assert_eq!(bbp_value(2.0).unwrap(), 2.5);
        assert!(bbp_value(-0.1).is_err());
        assert_eq!(bbp_overlap(1.0), 0.0);
        assert_eq!(bbp_overlap(2.0), 0.75);
        assert_eq!(bbp_overlap(0.5), 0.0);
    }

    #[test]
    fn window_for_centered_and_spiked() {
        let m = GaussianSeriesModel::goe(8).unwrap();
        let w = bbp_window(&m);
        assert_eq!((w.theta, w.value, w.error_radius, w.rank), (0.0, 2.0, 0.0, 0));
        assert!(w.isotropic && w.applicable);
        let v = CVec::from_element(8, c(1.0 / 8f64.sqrt()));
        let w = bbp_window(&m.spiked(2.0, &v).unwrap());
        assert_eq!(w.rank, 1);
        assert!((w.value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn window_flags_large_weak_variance() {
        // one coefficient I: σ* = 1, rank 3 → σ*√r > 1
        let m = GaussianSeriesModel::from_dense(diag(&[1.0, 1.0, 1.0]), vec![CMat::identity(3, 3)]).unwrap();
        assert!(!bbp_window(&m).applicable);
    }

    #[test]
    fn perturb_commuting() {
        let x = diag(&[2.0, 0.0]);
        let r = perturb_overlap(&x, &diag(&[1.0, 0.0]), 0.5).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-12 && (r.point - 1.0).abs() < 1e-12 && (r.upper - 1.0).abs() < 1e-12);
        let r = perturb_overlap(&x, &diag(&[0.0, 1.0]), 0.5).unwrap();
        assert!(r.lower.abs() < 1e-12 && r.point.abs() < 1e-12 && r.upper.abs() < 1e-12);
        assert!(perturb_overlap(&x, &diag(&[0.5, 0.0]), 0.5).is_err());
        assert!(perturb_overlap(&x, &diag(&[1.0, 0.0]), 0.0).is_err());
        assert!(perturb_overlap(&diag(&[1.0, 1.0]), &diag(&[1.0, 0.0]), 0.1).unwrap().degenerate);
    }

    #[test]
    fn low_rank() {
        let a = diag(&[3.0, -2.0, 1.0]);
        let (ar, tail) = low_rank_split(&a, 1).unwrap();
        assert!(fro_norm(&(ar - diag(&[3.0, 0.0, 0.0]))) < 1e-12);
        assert!((tail - 2.0).abs() < 1e-12);
        let (ar, tail) = low_rank_split(&a, 3).unwrap();
        assert!(fro_norm(&(ar - &a)) < 1e-12 && tail == 0.0);
        let (ar, tail) = low_rank_split(&a, 0).unwrap();
        assert!(fro_norm(&ar) == 0.0 && (tail - 3.0).abs() < 1e-12);
    }

    #[test]
    fn srank_zero_and_rank_one() {
        let m = crate::model::tests::random_model(5, 3, 9);
        assert_eq!(srank_bound_check(&m, &CMat::zeros(5, 5)).unwrap(), (0.0, 0.0));
        let v = CVec::from_fn(5, |i, _| c(1.0 + i as f64));
        let (bound, exact) = srank_bound_check(&m, &(&v * v.adjoint())).unwrap();
        assert!(exact <= bound + 1e-9 * bound.max(1.0), "{exact} {bound}");
    }

    #[test]
    fn three_point_rejects_bad_t() {
        let s = |_: u64| -> Result<(CMat, CMat)> { Ok((diag(&[1.0]), diag(&[1.0]))) };
        assert!(three_point_overlap(s, 1.0, 0.1, 0.2, 1, 0).is_err());
    }
}
