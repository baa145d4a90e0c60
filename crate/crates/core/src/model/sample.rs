use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Coefficient, GaussianSeriesModel, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, hermitian_norm, CMat};
use crate::rng::rng_from_seed;

/// X = A0 + Σ g_i A_i with the g_i drawn from the ChaCha20 stream of `seed`.
pub fn sample(model: &GaussianSeriesModel, seed: u64) -> CMat {
    let mut rng = rng_from_seed(seed);
    let mut x = model.a0().clone();
    for a in model.coeffs() {
        let g: f64 = StandardNormal.sample(&mut rng);
        a.add_scaled(g, &mut x);
    }
    x
}

/// Centered, unit-variance, bounded scalar laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarLaw {
    /// ±1 with probability 1/2.
    Rademacher,
    /// Uniform on [−√3, √3].
    Uniform,
}

impl ScalarLaw {
    /// Almost-sure bound on |ξ|.
    pub fn bound(self) -> f64 {
        match self {
            ScalarLaw::Rademacher => 1.0,
            ScalarLaw::Uniform => 3f64.sqrt(),
        }
    }

    pub fn draw(self, rng: &mut crate::rng::Rng) -> f64 {
        match self {
            ScalarLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ScalarLaw::Uniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
        }
    }
}

/// Z_i = ξ_i A_i with ξ_i an independent draw from `law`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniversalSummand {
    pub coeff: Coefficient,
    pub law: ScalarLaw,
}

/// X = Z0 + Σ Z_i with independent centered bounded summands.
#[derive(Clone, Debug, PartialEq)]
pub struct UniversalModel {
    z0: CMat,
    summands: Vec<UniversalSummand>,
    bound: f64,
}

impl UniversalModel {
    pub fn new(z0: CMat, summands: Vec<UniversalSummand>) -> Result<Self> {
        let d = z0.nrows();
        if d == 0 || z0.ncols() != d {
            return Err(Error::dim("z0 must be square and nonempty"));
        }
        let dev = hermitian_deviation(&z0);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotSelfAdjoint(dev));
        }
        let mut bound = 0.0f64;
        for s in &summands {
            s.coeff.validate(d)?;
            bound = bound.max(coefficient_norm(&s.coeff, d) * s.law.bound());
        }
        Ok(UniversalModel { z0, summands, bound })
    }

    /// Same coefficients as a Gaussian model, with every summand's scalar
    /// replaced by `law`.
    pub fn from_gaussian(model: &GaussianSeriesModel, law: ScalarLaw) -> Result<Self> {
        let summands = model.coeffs().iter().map(|a| UniversalSummand { coeff: a.clone(), law }).collect();
        Self::new(model.a0().clone(), summands)
    }

    pub fn dim(&self) -> usize {
        self.z0.nrows()
    }

    /// R with ‖Z_i‖ ≤ R almost surely.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn summands(&self) -> &[UniversalSummand] {
        &self.summands
    }

    /// The Gaussian model with the same mean and covariance.
    pub fn gaussian_model(&self) -> GaussianSeriesModel {
        GaussianSeriesModel::new(self.z0.clone(), self.summands.iter().map(|s| s.coeff.clone()).collect())
            .expect("validated at construction")
    }
}

fn coefficient_norm(a: &Coefficient, d: usize) -> f64 {
    match a {
        Coefficient::Sparse(e) if e.len() <= 2 => {
            // c(E_ij + E_ji) or cE_ii: norm |c|
            e.iter().map(|t| t.2.norm()).fold(0.0, f64::max)
        }
        _ => hermitian_norm(&a.to_dense(d)),
    }
}

pub fn sample_universal(model: &UniversalModel, seed: u64) -> CMat {
    let mut rng = rng_from_seed(seed);
    let mut x = model.z0.clone();
    for s in &model.summands {
        let xi = s.law.draw(&mut rng);
        s.coeff.add_scaled(xi, &mut x);
    }
    x
}
