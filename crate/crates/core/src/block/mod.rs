//! Block-structured variance profiles: X = (1/d)diag(z)𝐁diag(z) − diag(𝐁1/d) + G
//! with 𝐁 constant on blocks, and the q-dimensional calculus that describes
//! its free model.

mod algebra;
mod build;
mod reduced;

pub use algebra::{algebra_embed, mean_in_algebra, null_mean_in_algebra, variance_map_reduced, AlgebraElement, ReducedOperator};
pub use build::{block_parameters, build_block_model, sample_block, BLOCK_MODEL_MAX_DIM};
pub use reduced::{
    lambda_t, overlap_slope, perron_vector, phase_classify, reduced_lambda, reduced_lambda0, reduced_lambda0_from, reduced_lehner, Phase, PhaseReport,
    ReducedSolution,
};

use nalgebra::DVector;
use rand::Rng as _;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::rng::rng_from_seed;

/// Partition of [d] into contiguous blocks, the q×q profile B and the
/// signal z.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockModelSpec {
    block_sizes: Vec<usize>,
    b: RMat,
    z: DVector<f64>,
}

impl BlockModelSpec {
    pub fn new(block_sizes: Vec<usize>, b: RMat, z: DVector<f64>) -> Result<Self> {
        let q = block_sizes.len();
        if q == 0 {
            return Err(Error::invalid("at least one block required"));
        }
        if let Some(s) = block_sizes.iter().find(|&&s| s < 2) {
            return Err(Error::invalid(format!("block sizes must exceed 1, got {s}")));
        }
        if b.shape() != (q, q) {
            return Err(Error::dim(format!("B is {}×{}, expected {q}×{q}", b.nrows(), b.ncols())));
        }
        let scale = b.amax().max(1.0);
        for i in 0..q {
            for j in 0..q {
                if !b[(i, j)].is_finite() || b[(i, j)] < 0.0 {
                    return Err(Error::invalid("B must have finite nonnegative entries"));
                }
                if (b[(i, j)] - b[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::invalid("B must be symmetric"));
                }
            }
        }
        let b = (&b + b.transpose()) * 0.5;
        let d: usize = block_sizes.iter().sum();
        if z.len() != d {
            return Err(Error::dim(format!("z has length {}, expected {d}", z.len())));
        }
        let spec = BlockModelSpec { block_sizes, b, z };
        for k in 0..q {
            let r = spec.block_range(k);
            let norm: f64 = spec.z.rows(r.start, r.len()).norm_squared();
            if (norm - r.len() as f64).abs() > 1e-9 * r.len() as f64 {
                return Err(Error::invalid(format!("block {k}: Σ z_i² = {norm}, expected {}", r.len())));
            }
        }
        if !spec.irreducible() {
            return Err(Error::invalid("B is reducible; treat its irreducible blocks separately"));
        }
        Ok(spec)
    }

    /// z = 1.
    pub fn with_ones(block_sizes: Vec<usize>, b: RMat) -> Result<Self> {
        let d = block_sizes.iter().sum();
        Self::new(block_sizes, b, DVector::from_element(d, 1.0))
    }

    /// z with i.i.d. uniform signs.
    pub fn with_signs(block_sizes: Vec<usize>, b: RMat, seed: u64) -> Result<Self> {
        let d = block_sizes.iter().sum();
        let mut r = rng_from_seed(seed);
        let z = DVector::from_fn(d, |_, _| if r.random::<bool>() { 1.0 } else { -1.0 });
        Self::new(block_sizes, b, z)
    }

    pub fn q(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn d(&self) -> usize {
        self.z.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn b(&self) -> &RMat {
        &self.b
    }

    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    /// c_k = |C_k|/d.
    pub fn c(&self) -> DVector<f64> {
        let d = self.d() as f64;
        DVector::from_iterator(self.q(), self.block_sizes.iter().map(|&s| s as f64 / d))
    }

    pub fn block_range(&self, k: usize) -> std::ops::Range<usize> {
        let start: usize = self.block_sizes[..k].iter().sum();
        start..start + self.block_sizes[k]
    }

    /// Block index of each coordinate.
    pub fn labels(&self) -> Vec<usize> {
        self.block_sizes.iter().enumerate().flat_map(|(k, &s)| std::iter::repeat_n(k, s)).collect()
    }

    /// diag(c)^{1/2} B diag(c)^{1/2}.
    pub fn k_matrix(&self) -> RMat {
        let c = self.c();
        RMat::from_fn(self.q(), self.q(), |i, j| (c[i] * c[j]).sqrt() * self.b[(i, j)])
    }

    /// Same partition and signal, profile replaced.
    pub fn with_b(&self, b: RMat) -> Result<Self> {
        Self::new(self.block_sizes.clone(), b, self.z.clone())
    }

    fn irreducible(&self) -> bool {
        let q = self.q();
        let mut seen = vec![false; q];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(k) = stack.pop() {
            for l in 0..q {
                if !seen[l] && self.b[(k, l)] > 0.0 {
                    seen[l] = true;
                    stack.push(l);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// {"block_sizes": [...], "B": [[...]], "z": [...] | "ones" | "signs:<seed>"}.
    pub fn from_value(v: &Value) -> Result<Self> {
        let sizes: Vec<usize> = v
            .get("block_sizes")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("block_sizes must be a list"))?
            .iter()
            .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| Error::invalid("block size must be a nonnegative integer")))
            .collect::<Result<_>>()?;
        let rows = v.get("B").and_then(Value::as_array).ok_or_else(|| Error::invalid("B must be a list of rows"))?;
        let q = rows.len();
        let mut b = RMat::zeros(q, q);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array().filter(|r| r.len() == q).ok_or_else(|| Error::dim("B must be square"))?;
            for (j, x) in row.iter().enumerate() {
                b[(i, j)] = x.as_f64().ok_or_else(|| Error::invalid("B entries must be numbers"))?;
            }
        }
        if sizes.len() != q {
            return Err(Error::dim("B and block_sizes disagree on q"));
        }
        match v.get("z") {
            None => Self::with_ones(sizes, b),
            Some(Value::String(s)) if s == "ones" => Self::with_ones(sizes, b),
            Some(Value::String(s)) if s.starts_with("signs:") => {
                let seed = s[6..].parse::<u64>().map_err(|_| Error::invalid(format!("bad seed in {s:?}")))?;
                Self::with_signs(sizes, b, seed)
            }
            Some(Value::Array(a)) => {
                let z = a.iter().map(|x| x.as_f64().ok_or_else(|| Error::invalid("z entries must be numbers"))).collect::<Result<Vec<_>>>()?;
                Self::new(sizes, b, DVector::from_vec(z))
            }
            Some(other) => Err(Error::invalid(format!("bad z: {other}"))),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_value(&serde_json::from_str(s)?)
    }

    pub fn to_value(&self) -> Value {
        let b: Vec<Vec<f64>> = (0..self.q()).map(|i| (0..self.q()).map(|j| self.b[(i, j)]).collect()).collect();
        json!({"block_sizes": self.block_sizes, "B": b, "z": self.z.as_slice()})
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::Rng;

    pub(crate) fn random_spec(seed: u64, max_q: usize, max_d: usize) -> BlockModelSpec {
        let mut r = rng_from_seed(seed);
        let q = r.random_range(1..=max_q);
        let mut sizes = vec![2; q];
        let mut left = r.random_range(2 * q..=max_d.max(2 * q)) - 2 * q;
        while left > 0 {
            sizes[r.random_range(0..q)] += 1;
            left -= 1;
        }
        let mut b = RMat::from_fn(q, q, |_, _| r.random_range(0.1..2.0));
        b = (&b + b.transpose()) * 0.5;
        BlockModelSpec::with_signs(sizes, b, seed ^ 0xabc).unwrap()
    }

    #[test]
    fn json_forms() {
        let s = BlockModelSpec::from_json(r#"{"block_sizes": [2, 3], "B": [[1, 0.5], [0.5, 2]], "z": "signs:7"}"#).unwrap();
        assert_eq!(s.d(), 5);
        assert!(s.z().iter().all(|x| x.abs() == 1.0));
        let back = BlockModelSpec::from_value(&s.to_value()).unwrap();
        assert_eq!(s, back);
        assert!(BlockModelSpec::from_json(r#"{"block_sizes": [1, 3], "B": [[1, 0.5], [0.5, 2]]}"#).is_err());
        assert!(BlockModelSpec::from_json(r#"{"block_sizes": [2, 3], "B": [[1, 0], [0, 2]]}"#).is_err());
        assert!(BlockModelSpec::from_json(r#"{"block_sizes": [2, 2], "B": [[1, 0.5], [0.4, 2]]}"#).is_err());
        assert!(BlockModelSpec::from_json(r#"{"block_sizes": [2], "B": [[1]], "z": [1, 2]}"#).is_err());
    }
}
