//! Dense Hermitian linear algebra on top of nalgebra.
//!
//! Matrices are stored complex; when every imaginary part vanishes the real
//! symmetric solver is used instead, which is several times faster.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Largest entrywise |M_ij - conj(M_ji)|.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Re Tr(A* B), the real Frobenius inner product.
pub fn inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Normalized trace (1/d) Tr.
pub fn ntrace(m: &CMat) -> C64 {
    trace(m) / m.nrows() as f64
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    pub fn max(&self) -> f64 {
        *self.values.last().unwrap_or(&f64::NAN)
    }

    pub fn min(&self) -> f64 {
        *self.values.first().unwrap_or(&f64::NAN)
    }

    /// V f(Λ) V*.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn top_vector(&self) -> CVec {
        self.vectors.column(self.values.len() - 1).into_owned()
    }
}

fn sort_ascending<T: nalgebra::Scalar + Copy>(vals: &DVector<f64>, vecs: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let n = vals.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let values = idx.iter().map(|&i| vals[i]).collect();
    let vectors = DMatrix::from_fn(vecs.nrows(), n, |r, k| vecs[(r, idx[k])]);
    (values, vectors)
}

/// Real symmetric eigen-decomposition, ascending.
pub fn eigh_real(m: &RMat) -> (Vec<f64>, RMat) {
    if m.nrows() == 0 {
        return (Vec::new(), RMat::zeros(0, 0));
    }
    let sym = (m + m.transpose()).scale(0.5);
    let e = SymmetricEigen::new(sym);
    sort_ascending(&e.eigenvalues, &e.eigenvectors)
}

pub fn eigvalsh_real(m: &RMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()).scale(0.5);
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Hermitian eigen-decomposition of the Hermitian part of `m`.
pub fn eigh(m: &CMat) -> Eigh {
    if is_real(m) {
        let (values, vectors) = eigh_real(&real_part(m));
        return Eigh { values, vectors: to_complex(&vectors) };
    }
    let e = SymmetricEigen::new(hermitian_part(m));
    let (values, vectors) = sort_ascending(&e.eigenvalues, &e.eigenvectors);
    Eigh { values, vectors }
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    if is_real(m) {
        return eigvalsh_real(&real_part(m));
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn lambda_max(m: &CMat) -> f64 {
    eigvalsh(m).last().copied().unwrap_or(f64::NAN)
}

pub fn lambda_min(m: &CMat) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(f64::NAN)
}

/// Operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMat) -> f64 {
    let v = eigvalsh(m);
    match (v.first(), v.last()) {
        (Some(a), Some(b)) => a.abs().max(b.abs()),
        _ => 0.0,
    }
}

/// Operator norm of an arbitrary matrix (largest singular value).
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Largest per-pair residual ‖Av − λv‖ of a decomposition.
pub fn eigen_residual(m: &CMat, e: &Eigh) -> f64 {
    let av = m * &e.vectors;
    let mut worst = 0.0f64;
    for (j, &lam) in e.values.iter().enumerate() {
        let r = av.column(j) - e.vectors.column(j) * c(lam);
        worst = worst.max(r.norm());
    }
    worst
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inv_hpd(m: &CMat) -> Result<CMat> {
    let e = eigh(m);
    if !(e.min() > 0.0) {
        return Err(Error::Singular(format!("matrix not positive definite (λ_min = {:e})", e.min())));
    }
    Ok(e.apply(|x| 1.0 / x))
}

/// General inverse via LU.
pub fn inv(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("LU factorization failed".into()))
}

pub fn sqrt_psd(m: &CMat) -> CMat {
    eigh(m).apply(|x| x.max(0.0).sqrt())
}

/// Matrix geometric mean A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2},
/// the unique positive solution X of X A^{-1} X = B.
pub fn geometric_mean(a: &CMat, b: &CMat) -> Result<CMat> {
    let ea = eigh(a);
    if !(ea.min() > 0.0) {
        return Err(Error::Singular("geometric mean of a singular matrix".into()));
    }
    let ah = ea.apply(f64::sqrt);
    let aih = ea.apply(|x| 1.0 / x.sqrt());
    let inner = hermitian_part(&(&aih * b * &aih));
    let mid = sqrt_psd(&inner);
    Ok(hermitian_part(&(&ah * mid * &ah)))
}

/// First divided differences of exp at the eigenvalues `h`:
/// Γ_ij = (e^{h_i} − e^{h_j}) / (h_i − h_j), Γ_ii = e^{h_i}.
pub fn exp_divided_differences(h: &[f64]) -> RMat {
    let n = h.len();
    RMat::from_fn(n, n, |i, j| {
        let (a, b) = (h[i], h[j]);
        let d = a - b;
        if d.abs() < 1e-10 * (1.0 + a.abs()) {
            (0.5 * (a + b)).exp() * (1.0 + d * d / 24.0)
        } else {
            // e^b (e^d − 1)/d, stable for small d
            b.exp() * d.exp_m1() / d
        }
    })
}

/// Orthonormalized random complex vector helper for tests and restarts.
pub fn normalize(v: &mut CVec) -> f64 {
    let n = v.norm();
    if n > 0.0 {
        v.scale_mut(1.0 / n);
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn random_herm(d: usize, seed: u64, complex: bool) -> CMat {
        let mut r = rng_from_seed(seed);
        let g = CMat::from_fn(d, d, |_, _| {
            let re: f64 = StandardNormal.sample(&mut r);
            let im: f64 = if complex { StandardNormal.sample(&mut r) } else { 0.0 };
            C64::new(re, im)
        });
        hermitian_part(&g)
    }

    #[test]
    fn eigh_sorted_and_accurate() {
        for (seed, cx) in [(1, false), (2, true)] {
            let m = random_herm(7, seed, cx);
            let e = eigh(&m);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            assert!(eigen_residual(&m, &e) < 1e-10);
            let tr: f64 = e.values.iter().sum();
            assert!((tr - trace(&m).re).abs() < 1e-10);
        }
    }

    #[test]
    fn geometric_mean_solves_riccati() {
        let a = random_herm(5, 3, true);
        let b = random_herm(5, 4, true);
        let a = &a * &a + CMat::identity(5, 5);
        let b = &b * &b + CMat::identity(5, 5).scale(0.1);
        let x = geometric_mean(&a, &b).unwrap();
        let lhs = &x * inv_hpd(&a).unwrap() * &x;
        assert!(fro_norm(&(lhs - &b)) < 1e-9 * fro_norm(&b));
    }

    #[test]
    fn divided_differences_match_limit() {
        let g = exp_divided_differences(&[0.3, 0.3 + 1e-12, 1.0]);
        assert!((g[(0, 1)] - 0.3f64.exp()).abs() < 1e-10);
        assert!((g[(0, 2)] - (1f64.exp() - 0.3f64.exp()) / 0.7).abs() < 1e-12);
    }

    #[test]
    fn inverse_rejects_indefinite() {
        let m = to_complex(&RMat::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])));
        assert!(inv_hpd(&m).is_err());
    }
}
