//! Spiked Wigner matrix with a block variance profile Δ, whitened as
//! X = (1/Δ)⊙X̃ − diag((1/(dΔ))1).

use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};

use crate::block::BlockModelSpec;
use crate::error::{Error, Result};
use crate::linalg::{eigvalsh_real, RMat};
use crate::rng::rng_from_seed;

pub struct SpikedBlock {
    /// X̃ = (1/d)xxᵀ + H.
    pub x_tilde: RMat,
    pub x: RMat,
    /// X with x ← 0, same noise draw.
    pub x_null: RMat,
    pub snr: f64,
    pub spec: BlockModelSpec,
}

/// The block model with 𝐁 = 1/Δ and z = x.
pub fn spiked_block_spec(delta: &RMat, block_sizes: Vec<usize>, x: DVector<f64>) -> Result<BlockModelSpec> {
    if delta.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("Δ must have finite positive entries"));
    }
    if x.iter().any(|&s| s != 1.0 && s != -1.0) {
        return Err(Error::invalid("x must be a ±1 vector"));
    }
    BlockModelSpec::new(block_sizes, delta.map(|v| 1.0 / v), x)
}

/// SNR(Δ) = λmax(diag(c)^{1/2}(1/Δ)diag(c)^{1/2}).
pub fn snr_delta(spec: &BlockModelSpec) -> f64 {
    *eigvalsh_real(&spec.k_matrix()).last().expect("q ≥ 1")
}

pub fn spiked_block_build(delta: &RMat, block_sizes: Vec<usize>, x: DVector<f64>, seed: u64) -> Result<SpikedBlock> {
    let spec = spiked_block_spec(delta, block_sizes, x)?;
    let d = spec.d();
    let labels = spec.labels();
    let xs = spec.z();
    let mut r = rng_from_seed(seed);
    let mut h = RMat::zeros(d, d);
    for j in 0..d {
        for i in 0..=j {
            let g: f64 = StandardNormal.sample(&mut r);
            let var = delta[(labels[i], labels[j])] * if i == j { 2.0 } else { 1.0 } / d as f64;
            h[(i, j)] = g * var.sqrt();
            h[(j, i)] = h[(i, j)];
        }
    }
    let x_tilde = xs * xs.transpose() / d as f64 + &h;
    let b = RMat::from_fn(d, d, |i, j| 1.0 / delta[(labels[i], labels[j])]);
    let comp: Vec<f64> = (0..d).map(|i| b.row(i).sum() / d as f64).collect();
    let whiten = |m: &RMat| {
        let mut out = m.component_mul(&b);
        for i in 0..d {
            out[(i, i)] -= comp[i];
        }
        out
    };
    Ok(SpikedBlock { x: whiten(&x_tilde), x_null: whiten(&h), x_tilde, snr: snr_delta(&spec), spec })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{algebra_embed, mean_in_algebra};
    use crate::linalg::real_part;

    #[test]
    fn scalar_snr() {
        let one = RMat::from_element(1, 1, 1.0);
        let x = DVector::from_element(6, 1.0);
        let s = spiked_block_build(&one, vec![6], x.clone(), 1).unwrap();
        assert!((s.snr - 1.0).abs() < 1e-15);
        assert_eq!(s.spec.b()[(0, 0)], 1.0);
        let half = RMat::from_element(1, 1, 0.5);
        assert!((spiked_block_build(&half, vec![6], x, 1).unwrap().snr - 2.0).abs() < 1e-15);
    }

    #[test]
    fn matches_display_entrywise() {
        let delta = RMat::from_row_slice(2, 2, &[0.5, 2.0, 2.0, 1.0]);
        let x = DVector::from_vec(vec![1.0, -1.0, 1.0, 1.0, -1.0, -1.0]);
        let s = spiked_block_build(&delta, vec![2, 4], x.clone(), 3).unwrap();
        let lab = [0, 0, 1, 1, 1, 1];
        for i in 0..6 {
            let comp: f64 = (0..6).map(|j| 1.0 / delta[(lab[i], lab[j])]).sum::<f64>() / 6.0;
            for j in 0..6 {
                let want = s.x_tilde[(i, j)] / delta[(lab[i], lab[j])] - if i == j { comp } else { 0.0 };
                assert!((s.x[(i, j)] - want).abs() < 1e-14);
                let signal = x[i] * x[j] / 6.0 / delta[(lab[i], lab[j])];
                assert!((s.x[(i, j)] - s.x_null[(i, j)] - signal).abs() < 1e-14);
            }
        }
        // the mean is the block-model mean
        let mean = real_part(&algebra_embed(&s.spec, &mean_in_algebra(&s.spec)).unwrap());
        let mut noise_free = &s.x - &s.x_null;
        for i in 0..6 {
            noise_free[(i, i)] -= (0..6).map(|j| 1.0 / delta[(lab[i], lab[j])]).sum::<f64>() / 6.0;
        }
        assert!((noise_free - mean).amax() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_delta() {
        let bad = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(spiked_block_build(&bad, vec![2, 2], DVector::from_element(4, 1.0), 0).is_err());
    }
}
