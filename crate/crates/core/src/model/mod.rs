//! Gaussian series models X = A0 + Σ A_i g_i and their covariance map.

mod dilation;
pub mod io;
mod params;
mod sample;
mod spectrum;

pub use dilation::{dilate, RectangularModel};
pub use params::{compute_parameters, compute_parameters_with, sigma_star_alternating, ModelParameters, SigmaStarOptions};
pub use sample::{sample, sample_universal, ScalarLaw, UniversalModel, UniversalSummand};
pub use spectrum::{eigen_spectrum, hausdorff_distance, ClosedSet, Interval, SpectrumSet, SupportSet};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_deviation, C64, CMat, CVec, ZERO};

/// Tolerance on entrywise deviation from self-adjointness.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A d×d self-adjoint coefficient matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Dense(CMat),
    /// Nonzero entries (row, col, value); both triangles are listed.
    Sparse(Vec<(usize, usize, C64)>),
}

impl Coefficient {
    /// Coefficient c·(E_ij + E_ji) for i ≠ j, or c·E_ii.
    pub fn real_entry(i: usize, j: usize, value: f64) -> Self {
        if i == j {
            Coefficient::Sparse(vec![(i, i, c(value))])
        } else {
            Coefficient::Sparse(vec![(i, j, c(value)), (j, i, c(value))])
        }
    }

    /// Coefficient c·(i E_ij − i E_ji), the imaginary counterpart.
    pub fn imag_entry(i: usize, j: usize, value: f64) -> Self {
        Coefficient::Sparse(vec![(i, j, C64::new(0.0, value)), (j, i, C64::new(0.0, -value))])
    }

    pub fn to_dense(&self, d: usize) -> CMat {
        match self {
            Coefficient::Dense(m) => m.clone(),
            Coefficient::Sparse(e) => {
                let mut m = CMat::zeros(d, d);
                for &(i, j, v) in e {
                    m[(i, j)] += v;
                }
                m
            }
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Coefficient::Dense(m) => m.len(),
            Coefficient::Sparse(e) => e.len(),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Coefficient::Dense(m) => m.iter().all(|z| z.im == 0.0),
            Coefficient::Sparse(e) => e.iter().all(|t| t.2.im == 0.0),
        }
    }

    /// out += w·A.
    pub fn add_scaled(&self, w: f64, out: &mut CMat) {
        match self {
            Coefficient::Dense(m) => *out += m * c(w),
            Coefficient::Sparse(e) => {
                for &(i, j, v) in e {
                    out[(i, j)] += v * w;
                }
            }
        }
    }

    pub fn matvec(&self, x: &CVec) -> CVec {
        match self {
            Coefficient::Dense(m) => m * x,
            Coefficient::Sparse(e) => {
                let mut y = CVec::zeros(x.len());
                for &(i, j, v) in e {
                    y[i] += v * x[j];
                }
                y
            }
        }
    }

    /// out += A M A.
    pub fn sandwich_add(&self, m: &CMat, out: &mut CMat) {
        match self {
            Coefficient::Dense(a) => *out += a * m * a,
            Coefficient::Sparse(e) => {
                for &(r, i, a) in e {
                    for &(j, s, b) in e {
                        out[(r, s)] += a * m[(i, j)] * b;
                    }
                }
            }
        }
    }

    /// Tr(A* B) for two coefficients of the same dimension.
    pub fn trace_inner(&self, other: &Coefficient, d: usize) -> C64 {
        match (self, other) {
            (Coefficient::Sparse(a), Coefficient::Sparse(b)) => {
                let mut s = ZERO;
                for &(i, j, x) in a {
                    for &(k, l, y) in b {
                        if i == k && j == l {
                            s += x.conj() * y;
                        }
                    }
                }
                s
            }
            _ => {
                let a = self.to_dense(d);
                let b = other.to_dense(d);
                a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
            }
        }
    }

    /// Σ conj(A_rs) Y_rs.
    pub fn trace_against(&self, y: &CMat) -> C64 {
        match self {
            Coefficient::Dense(a) => a.iter().zip(y.iter()).map(|(x, z)| x.conj() * z).sum(),
            Coefficient::Sparse(e) => e.iter().map(|&(i, j, v)| v.conj() * y[(i, j)]).sum(),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            Coefficient::Dense(m) => {
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::dim(format!("coefficient is {}×{}, expected {d}×{d}", m.nrows(), m.ncols())));
                }
            }
            Coefficient::Sparse(e) => {
                if e.iter().any(|&(i, j, _)| i >= d || j >= d) {
                    return Err(Error::dim(format!("sparse coefficient index out of range for d = {d}")));
                }
            }
        }
        let dev = hermitian_deviation(&self.to_dense(d));
        if dev > HERMITIAN_TOL {
            return Err(Error::NotSelfAdjoint(dev));
        }
        Ok(())
    }
}

/// X = A0 + Σ_i A_i g_i with g_i i.i.d. standard Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSeriesModel {
    d: usize,
    a0: CMat,
    coeffs: Vec<Coefficient>,
}

impl GaussianSeriesModel {
    pub fn new(a0: CMat, coeffs: Vec<Coefficient>) -> Result<Self> {
        let d = a0.nrows();
        if d == 0 || a0.ncols() != d {
            return Err(Error::dim(format!("mean is {}×{}, expected square with d ≥ 1", a0.nrows(), a0.ncols())));
        }
        let dev = hermitian_deviation(&a0);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotSelfAdjoint(dev));
        }
        for a in &coeffs {
            a.validate(d)?;
        }
        Ok(GaussianSeriesModel { d, a0, coeffs })
    }

    pub fn from_dense(a0: CMat, coeffs: Vec<CMat>) -> Result<Self> {
        Self::new(a0, coeffs.into_iter().map(Coefficient::Dense).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn a0(&self) -> &CMat {
        &self.a0
    }

    pub fn coeffs(&self) -> &[Coefficient] {
        &self.coeffs
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_real(&self) -> bool {
        self.a0.iter().all(|z| z.im == 0.0) && self.coeffs.iter().all(Coefficient::is_real)
    }

    pub fn with_mean(mut self, a0: CMat) -> Result<Self> {
        if a0.nrows() != self.d || a0.ncols() != self.d {
            return Err(Error::dim("mean dimension does not match model"));
        }
        let dev = hermitian_deviation(&a0);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotSelfAdjoint(dev));
        }
        self.a0 = a0;
        Ok(self)
    }

    /// The model −X.
    pub fn negated(&self) -> Self {
        GaussianSeriesModel { d: self.d, a0: -&self.a0, coeffs: self.coeffs.clone() }
    }

    /// One scalar semicircular variable: d = 1, A0 = 0, A1 = 1.
    pub fn semicircle() -> Self {
        GaussianSeriesModel { d: 1, a0: CMat::zeros(1, 1), coeffs: vec![Coefficient::Dense(CMat::identity(1, 1))] }
    }

    /// Real symmetric Wigner model normalized so that E[G²] = 1.
    pub fn goe(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let off = (1.0 / (d as f64 + 1.0)).sqrt();
        let diag = (2.0 / (d as f64 + 1.0)).sqrt();
        let mut coeffs = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            coeffs.push(Coefficient::real_entry(i, i, diag));
            for j in i + 1..d {
                coeffs.push(Coefficient::real_entry(i, j, off));
            }
        }
        Ok(GaussianSeriesModel { d, a0: CMat::zeros(d, d), coeffs })
    }

    /// Complex Hermitian Wigner model normalized so that E[G²] = 1.
    pub fn gue(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let s = (1.0 / d as f64).sqrt();
        let h = (0.5 / d as f64).sqrt();
        let mut coeffs = Vec::with_capacity(d * d);
        for i in 0..d {
            coeffs.push(Coefficient::real_entry(i, i, s));
            for j in i + 1..d {
                coeffs.push(Coefficient::real_entry(i, j, h));
                coeffs.push(Coefficient::imag_entry(i, j, h));
            }
        }
        Ok(GaussianSeriesModel { d, a0: CMat::zeros(d, d), coeffs })
    }

    /// Periodic band matrix of odd width `w`: entries with circular distance
    /// at most (w−1)/2 have variance 1/w, so E[G²] = 1.
    pub fn band(d: usize, w: usize) -> Result<Self> {
        if w == 0 || w % 2 == 0 || w > d {
            return Err(Error::invalid(format!("band width must be odd and at most d (got {w}, d = {d})")));
        }
        let s = 1.0 / (w as f64).sqrt();
        let half = (w - 1) / 2;
        let mut coeffs = Vec::with_capacity(d * (half + 1));
        for i in 0..d {
            coeffs.push(Coefficient::real_entry(i, i, s));
            for k in 1..=half {
                let j = (i + k) % d;
                // each unordered pair once; for w = d and even d the antipode
                // would otherwise be listed twice
                if 2 * k == d && i >= j {
                    continue;
                }
                coeffs.push(Coefficient::real_entry(i.min(j), i.max(j), s));
            }
        }
        Ok(GaussianSeriesModel { d, a0: CMat::zeros(d, d), coeffs })
    }

    /// Replace the mean by θ·vv*.
    pub fn spiked(self, theta: f64, v: &CVec) -> Result<Self> {
        let nv = v.norm();
        if v.len() != self.d || nv == 0.0 {
            return Err(Error::dim("spike vector must be nonzero of length d"));
        }
        let u = v / c(nv);
        let a0 = (&u * u.adjoint()) * c(theta);
        self.with_mean(crate::linalg::hermitian_part(&a0))
    }

    /// S(M) = Σ A_i M A_i without argument checks; M need not be self-adjoint.
    pub fn apply_cov(&self, m: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d, self.d);
        for a in &self.coeffs {
            a.sandwich_add(m, &mut out);
        }
        out
    }
}

/// S(M) = E[(X − EX) M (X − EX)] = Σ_i A_i M A_i.
pub fn covariance_map(model: &GaussianSeriesModel, m: &CMat) -> Result<CMat> {
    if m.nrows() != model.d || m.ncols() != model.d {
        return Err(Error::dim(format!("argument is {}×{}, model has d = {}", m.nrows(), m.ncols(), model.d)));
    }
    Ok(model.apply_cov(m))
}

/// A mean plus a linear covariance map, the data entering the Lehner
/// variational principle and the matrix Dyson equation.
pub trait CovarianceOperator: Sync {
    fn dim(&self) -> usize;
    fn mean(&self) -> CMat;
    /// S(M) for an arbitrary (not necessarily self-adjoint) M.
    fn apply(&self, m: &CMat) -> CMat;
    /// Adjoint with respect to Re Tr(A* B).
    fn apply_adjoint(&self, m: &CMat) -> CMat {
        self.apply(m)
    }
    /// Natural length scale of the noise, used to set solver tolerances.
    fn noise_scale(&self) -> f64 {
        let d = self.dim();
        crate::linalg::lambda_max(&self.apply(&CMat::identity(d, d))).max(0.0).sqrt()
    }
}

impl CovarianceOperator for GaussianSeriesModel {
    fn dim(&self) -> usize {
        self.d
    }
    fn mean(&self) -> CMat {
        self.a0.clone()
    }
    fn apply(&self, m: &CMat) -> CMat {
        self.apply_cov(m)
    }
}
