use rand_distr::{Distribution, StandardNormal};

use super::BlockModelSpec;
use crate::error::{Error, Result};
use crate::lanczos::{top_eigenpair_hermitian, LanczosOptions};
use crate::linalg::{normalize, CVec, RMat, C64};
use crate::model::{Coefficient, GaussianSeriesModel, ModelParameters};
use crate::rng::{rng_from_seed, sub_seed};

/// Largest d for which the block model is materialized as a Gaussian
/// series (one coefficient per independent entry).
pub const BLOCK_MODEL_MAX_DIM: usize = 1024;

fn mean_matrix(spec: &BlockModelSpec, include_signal: bool) -> RMat {
    let d = spec.d();
    let labels = spec.labels();
    let b = spec.b();
    let z = spec.z();
    let row_sums: Vec<f64> = {
        let bc = b * spec.c();
        labels.iter().map(|&k| bc[k]).collect()
    };
    RMat::from_fn(d, d, |i, j| {
        let signal = if include_signal { z[i] * z[j] * b[(labels[i], labels[j])] / d as f64 } else { 0.0 };
        signal - if i == j { row_sums[i] } else { 0.0 }
    })
}

/// X (or X_∅ without the signal) as a Gaussian series with one real
/// coefficient per entry G_ij, i ≤ j, of variance (1 + 1_{i=j})𝐁_ij/d.
pub fn build_block_model(spec: &BlockModelSpec, include_signal: bool) -> Result<GaussianSeriesModel> {
    let d = spec.d();
    if d > BLOCK_MODEL_MAX_DIM {
        return Err(Error::MemoryCap(format!("block model with d = {d} exceeds {BLOCK_MODEL_MAX_DIM}; use sample_block")));
    }
    let labels = spec.labels();
    let b = spec.b();
    let mut coeffs = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            let var = b[(labels[i], labels[j])] / d as f64;
            if var == 0.0 {
                continue;
            }
            if i == j {
                coeffs.push(Coefficient::real_entry(i, i, (2.0 * var).sqrt()));
            } else {
                coeffs.push(Coefficient::real_entry(i, j, var.sqrt()));
            }
        }
    }
    GaussianSeriesModel::new(crate::linalg::to_complex(&mean_matrix(spec, include_signal)), coeffs)
}

/// Draw X (or X_∅) directly as a dense real matrix; no size cap.
pub fn sample_block(spec: &BlockModelSpec, include_signal: bool, seed: u64) -> RMat {
    let d = spec.d();
    let labels = spec.labels();
    let b = spec.b();
    let mut x = mean_matrix(spec, include_signal);
    let mut r = rng_from_seed(seed);
    for i in 0..d {
        for j in i..d {
            let g: f64 = StandardNormal.sample(&mut r);
            let var = b[(labels[i], labels[j])] / d as f64 * if i == j { 2.0 } else { 1.0 };
            let val = g * var.sqrt();
            x[(i, j)] += val;
            if i != j {
                x[(j, i)] += val;
            }
        }
    }
    x
}

/// σ, v, σ* of the block model from its structure. σ² = max_i (1/d)Σ_j
/// 𝐁_ij(1 + 1_{i=j}); v² = 2 max B/d; σ* by alternating maximization with
/// the O(dq) matvec of S(ww*).
pub fn block_parameters(spec: &BlockModelSpec) -> ModelParameters {
    let d = spec.d();
    let q = spec.q();
    let b = spec.b();
    let sizes: Vec<f64> = spec.block_sizes().iter().map(|&s| s as f64).collect();
    let sigma2 = (0..q).map(|k| ((0..q).map(|l| b[(k, l)] * sizes[l]).sum::<f64>() + b[(k, k)]) / d as f64).fold(0.0, f64::max);
    let v2 = 2.0 * b.max() / d as f64;
    ModelParameters::new(sigma2.sqrt(), v2.sqrt(), block_sigma_star(spec))
}

/// x ↦ S(ww*)x = (1/d)[(𝐁⊙w̄wᵀ)x + (𝐁|w|²)⊙x].
fn rank_one_matvec(spec: &BlockModelSpec, labels: &[usize], w: &CVec, x: &CVec) -> CVec {
    let q = spec.q();
    let d = spec.d();
    let b = spec.b();
    let mut wx = vec![C64::new(0.0, 0.0); q];
    let mut ww = vec![0.0; q];
    for i in 0..d {
        wx[labels[i]] += w[i] * x[i];
        ww[labels[i]] += w[i].norm_sqr();
    }
    let bwx: Vec<C64> = (0..q).map(|k| (0..q).map(|l| wx[l] * b[(k, l)]).sum()).collect();
    let bww: Vec<f64> = (0..q).map(|k| (0..q).map(|l| ww[l] * b[(k, l)]).sum()).collect();
    CVec::from_fn(d, |i, _| (w[i].conj() * bwx[labels[i]] + x[i] * bww[labels[i]]) / d as f64)
}

fn block_sigma_star(spec: &BlockModelSpec) -> f64 {
    let d = spec.d();
    let labels = spec.labels();
    let mut best = 0.0f64;
    for restart in 0..8u64 {
        let mut r = rng_from_seed(sub_seed(0x5157, restart));
        let mut w = CVec::from_fn(d, |_, _| {
            let a: f64 = StandardNormal.sample(&mut r);
            let b: f64 = StandardNormal.sample(&mut r);
            C64::new(a, b)
        });
        normalize(&mut w);
        let mut val = 0.0;
        for it in 0..200 {
            let opts = LanczosOptions { seed: sub_seed(restart, it), ..Default::default() };
            let Ok((lam, u, _)) = top_eigenpair_hermitian(d, |x: &CVec, y: &mut CVec| *y = rank_one_matvec(spec, &labels, &w, x), &opts) else {
                break;
            };
            let converged = (lam - val).abs() <= 1e-10 * lam.abs().max(1e-300);
            val = lam;
            w = u;
            if converged {
                break;
            }
        }
        best = best.max(val);
    }
    best.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::tests::random_spec;
    use crate::linalg::CMat;
    use crate::model::compute_parameters;

    #[test]
    fn scalar_profile_variances() {
        let d = 7;
        let spec = BlockModelSpec::with_ones(vec![d], RMat::from_element(1, 1, 1.0)).unwrap();
        let m = build_block_model(&spec, true).unwrap();
        let s = m.apply_cov(&CMat::identity(d, d));
        for i in 0..d {
            assert!((s[(i, i)].re - (1.0 + 1.0 / d as f64)).abs() < 1e-12);
        }
        let null = build_block_model(&spec, false).unwrap();
        let a0 = null.a0();
        assert!((0..d).all(|i| (0..d).all(|j| i == j || a0[(i, j)].norm() == 0.0)));
    }

    #[test]
    fn closed_form_parameters_match_generic() {
        for seed in 0..4 {
            let spec = random_spec(seed + 30, 3, 10);
            let m = build_block_model(&spec, true).unwrap();
            let p = block_parameters(&spec);
            let g = compute_parameters(&m);
            assert!((p.sigma - g.sigma).abs() < 1e-10, "{p:?} {g:?}");
            assert!((p.v - g.v).abs() < 1e-8, "{p:?} {g:?}");
            assert!((p.sigma_star - g.sigma_star).abs() < 1e-6, "{p:?} {g:?}");
        }
    }

    #[test]
    fn sampled_entry_variances() {
        let spec = BlockModelSpec::with_signs(vec![3, 3], RMat::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]), 4).unwrap();
        let d = 6;
        let trials = 10_000;
        let mean = mean_matrix(&spec, true);
        let mut acc = RMat::zeros(d, d);
        for t in 0..trials {
            let x = sample_block(&spec, true, t);
            acc += (x - &mean).map(|e| e * e);
        }
        acc /= trials as f64;
        let labels = spec.labels();
        for i in 0..d {
            for j in 0..d {
                let var = spec.b()[(labels[i], labels[j])] / d as f64 * if i == j { 2.0 } else { 1.0 };
                // standard error of a variance estimate: var·√(2/trials)
                assert!((acc[(i, j)] - var).abs() < 5.0 * var * (2.0 / trials as f64).sqrt());
            }
        }
    }

    #[test]
    fn cap_enforced() {
        let spec = BlockModelSpec::with_ones(vec![BLOCK_MODEL_MAX_DIM + 1], RMat::from_element(1, 1, 1.0)).unwrap();
        assert!(matches!(build_block_model(&spec, true), Err(Error::MemoryCap(_))));
    }
}
