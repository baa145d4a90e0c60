//! The *-subalgebra spanned by f_k f_l* and P_k = 1_{C_k} − f_k f_k*,
//! f_k = z⊙1_{C_k}/√|C_k|, which is invariant under the covariance map.

use super::BlockModelSpec;
use crate::error::{Error, Result};
use crate::linalg::{c, C64, CMat, CVec};
use crate::model::CovarianceOperator;

/// A(M, v) = Σ M_kl f_k f_l* + Σ v_k P_k.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub m: CMat,
    pub v: CVec,
}

impl AlgebraElement {
    pub fn new(m: CMat, v: CVec) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() != v.len() {
            return Err(Error::dim("M must be q×q and v of length q"));
        }
        Ok(AlgebraElement { m, v })
    }

    pub fn zeros(q: usize) -> Self {
        AlgebraElement { m: CMat::zeros(q, q), v: CVec::zeros(q) }
    }

    pub fn q(&self) -> usize {
        self.v.len()
    }

    /// block-diag(M, diag(v)), a 2q×2q matrix with the same spectrum up to
    /// multiplicities.
    pub fn to_block(&self) -> CMat {
        let q = self.q();
        let mut out = CMat::zeros(2 * q, 2 * q);
        out.view_mut((0, 0), (q, q)).copy_from(&self.m);
        for k in 0..q {
            out[(q + k, q + k)] = self.v[k];
        }
        out
    }

    /// Inverse of `to_block`, discarding everything off the block pattern.
    pub fn from_block(y: &CMat) -> Self {
        let q = y.nrows() / 2;
        AlgebraElement { m: y.view((0, 0), (q, q)).into_owned(), v: CVec::from_fn(q, |k, _| y[(q + k, q + k)]) }
    }
}

fn check(spec: &BlockModelSpec, e: &AlgebraElement) -> Result<()> {
    if e.q() != spec.q() || e.m.shape() != (spec.q(), spec.q()) {
        return Err(Error::dim(format!("element has q = {}, spec has q = {}", e.q(), spec.q())));
    }
    Ok(())
}

pub fn algebra_embed(spec: &BlockModelSpec, e: &AlgebraElement) -> Result<CMat> {
    check(spec, e)?;
    let d = spec.d();
    let labels = spec.labels();
    let size: Vec<f64> = spec.block_sizes().iter().map(|&s| s as f64).collect();
    let z = spec.z();
    Ok(CMat::from_fn(d, d, |i, j| {
        let (k, l) = (labels[i], labels[j]);
        let f = z[i] * z[j];
        let mut x = e.m[(k, l)] * (f / (size[k] * size[l]).sqrt());
        if k == l {
            let p = if i == j { 1.0 } else { 0.0 } - f / size[k];
            x += e.v[k] * p;
        }
        x
    }))
}

/// E X = A(diag(c)^{1/2}B diag(c)^{1/2} − diag(Bc), −Bc).
pub fn mean_in_algebra(spec: &BlockModelSpec) -> AlgebraElement {
    let kk = spec.k_matrix();
    let bc = spec.b() * spec.c();
    let q = spec.q();
    AlgebraElement {
        m: CMat::from_fn(q, q, |i, j| c(kk[(i, j)] - if i == j { bc[i] } else { 0.0 })),
        v: bc.map(|x| c(-x)),
    }
}

/// E X_∅ = A(−diag(Bc), −Bc).
pub fn null_mean_in_algebra(spec: &BlockModelSpec) -> AlgebraElement {
    let bc = spec.b() * spec.c();
    AlgebraElement { m: CMat::from_diagonal(&bc.map(|x| c(-x))), v: bc.map(|x| c(-x)) }
}

fn bmul(b: &crate::linalg::RMat, x: &CVec) -> CVec {
    CVec::from_fn(b.nrows(), |i, _| (0..b.ncols()).map(|j| x[j] * b[(i, j)]).sum())
}

/// E[G A(M, v) G] = A(diag(Bw) + (1/d)B⊙Mᵀ, Bw + (1/d)v⊙diag(B)) with
/// w = c⊙v + (1/d)(diag(M) − v).
pub fn variance_map_reduced(spec: &BlockModelSpec, e: &AlgebraElement) -> Result<AlgebraElement> {
    check(spec, e)?;
    Ok(apply_reduced(spec, e))
}

fn apply_reduced(spec: &BlockModelSpec, e: &AlgebraElement) -> AlgebraElement {
    let q = spec.q();
    let d = spec.d() as f64;
    let b = spec.b();
    let cv = spec.c();
    let w = CVec::from_fn(q, |k, _| e.v[k] * cv[k] + (e.m[(k, k)] - e.v[k]) / d);
    let u = bmul(b, &w);
    let m = CMat::from_fn(q, q, |k, l| e.m[(l, k)] * (b[(k, l)] / d) + if k == l { u[k] } else { C64::new(0.0, 0.0) });
    let v = CVec::from_fn(q, |k, _| u[k] + e.v[k] * (b[(k, k)] / d));
    AlgebraElement { m, v }
}

/// Adjoint of `apply_reduced` with respect to Re Tr on block-diag(M, diag(v)).
fn apply_reduced_adjoint(spec: &BlockModelSpec, e: &AlgebraElement) -> AlgebraElement {
    let q = spec.q();
    let d = spec.d() as f64;
    let b = spec.b();
    let cv = spec.c();
    let s = CVec::from_fn(q, |k, _| e.m[(k, k)] + e.v[k]);
    let u = bmul(b, &s);
    let m = CMat::from_fn(q, q, |k, l| e.m[(l, k)] * (b[(l, k)] / d) + if k == l { u[k] / d } else { C64::new(0.0, 0.0) });
    let v = CVec::from_fn(q, |k, _| u[k] * cv[k] - u[k] / d + e.v[k] * (b[(k, k)] / d));
    AlgebraElement { m, v }
}

/// The Lehner problem of a block model restricted to its invariant
/// algebra, posed on 2q×2q matrices block-diag(M, diag(v)). Pinching onto
/// that pattern can only lower the objective, so the infimum equals the
/// one over all d×d matrices.
pub struct ReducedOperator {
    spec: BlockModelSpec,
    mean: AlgebraElement,
}

impl ReducedOperator {
    pub fn new(spec: &BlockModelSpec, include_signal: bool) -> Self {
        let mean = if include_signal { mean_in_algebra(spec) } else { null_mean_in_algebra(spec) };
        ReducedOperator { spec: spec.clone(), mean }
    }

    pub fn with_mean(spec: &BlockModelSpec, mean: AlgebraElement) -> Result<Self> {
        check(spec, &mean)?;
        Ok(ReducedOperator { spec: spec.clone(), mean })
    }
}

impl CovarianceOperator for ReducedOperator {
    fn dim(&self) -> usize {
        2 * self.spec.q()
    }
    fn mean(&self) -> CMat {
        self.mean.to_block()
    }
    fn apply(&self, m: &CMat) -> CMat {
        apply_reduced(&self.spec, &AlgebraElement::from_block(m)).to_block()
    }
    fn apply_adjoint(&self, m: &CMat) -> CMat {
        apply_reduced_adjoint(&self.spec, &AlgebraElement::from_block(m)).to_block()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::build_block_model;
    use crate::block::tests::random_spec;
    use crate::linalg::{fro_norm, inner, lambda_max, RMat};
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn random_elem(q: usize, seed: u64, hermitian: bool) -> AlgebraElement {
        let mut r = rng_from_seed(seed);
        let mut g = || -> C64 {
            let a: f64 = StandardNormal.sample(&mut r);
            let b: f64 = StandardNormal.sample(&mut r);
            C64::new(a, b)
        };
        let mut m = CMat::from_fn(q, q, |_, _| g());
        let mut v = CVec::from_fn(q, |_, _| g());
        if hermitian {
            m = crate::linalg::hermitian_part(&m);
            v = v.map(|x| c(x.re));
        }
        AlgebraElement { m, v }
    }

    #[test]
    fn identity_and_trace() {
        let spec = random_spec(1, 3, 12);
        let q = spec.q();
        let id = AlgebraElement { m: CMat::identity(q, q), v: CVec::from_element(q, c(1.0)) };
        let e = algebra_embed(&spec, &id).unwrap();
        assert!(fro_norm(&(e - CMat::identity(spec.d(), spec.d()))) < 1e-12);
        let only_v = AlgebraElement { m: CMat::zeros(q, q), v: CVec::from_fn(q, |k, _| c(1.0 + k as f64)) };
        let tr = crate::linalg::trace(&algebra_embed(&spec, &only_v).unwrap()).re;
        let want: f64 = (0..q).map(|k| (1.0 + k as f64) * (spec.block_sizes()[k] as f64 - 1.0)).sum();
        assert!((tr - want).abs() < 1e-10);
    }

    #[test]
    fn top_eigenvalue_of_embedding() {
        let spec = random_spec(4, 3, 14);
        let e = random_elem(spec.q(), 5, true);
        let want = lambda_max(&e.m).max(e.v.iter().map(|x| x.re).fold(f64::MIN, f64::max));
        assert!((lambda_max(&algebra_embed(&spec, &e).unwrap()) - want).abs() < 1e-10);
    }

    #[test]
    fn scalar_mean_and_variance() {
        let spec = BlockModelSpec::with_ones(vec![5], RMat::from_element(1, 1, 0.7)).unwrap();
        let m = mean_in_algebra(&spec);
        assert!(m.m[(0, 0)].norm() < 1e-15 && (m.v[0].re + 0.7).abs() < 1e-15);
        let (mm, w, beta, d) = (0.3, -1.2, 0.7, 5.0);
        let e = AlgebraElement { m: CMat::from_element(1, 1, c(mm)), v: CVec::from_element(1, c(w)) };
        let r = variance_map_reduced(&spec, &e).unwrap();
        let base = beta * (w + (mm - w) / d);
        assert!((r.m[(0, 0)].re - (base + beta * mm / d)).abs() < 1e-14);
        assert!((r.v[0].re - (base + beta * w / d)).abs() < 1e-14);
        let zero = variance_map_reduced(&spec, &AlgebraElement::zeros(1)).unwrap();
        assert_eq!(zero, AlgebraElement::zeros(1));
    }

    #[test]
    fn mean_embeds_to_model_mean() {
        for seed in 0..5 {
            let spec = random_spec(seed, 3, 12);
            let model = build_block_model(&spec, true).unwrap();
            assert!(fro_norm(&(algebra_embed(&spec, &mean_in_algebra(&spec)).unwrap() - model.a0())) < 1e-12);
            let null = build_block_model(&spec, false).unwrap();
            assert!(fro_norm(&(algebra_embed(&spec, &null_mean_in_algebra(&spec)).unwrap() - null.a0())) < 1e-12);
        }
    }

    #[test]
    fn variance_map_matches_covariance_map() {
        for seed in 0..8 {
            let spec = random_spec(seed + 10, 3, 14);
            let model = build_block_model(&spec, true).unwrap();
            let e = random_elem(spec.q(), seed, false);
            let lhs = algebra_embed(&spec, &variance_map_reduced(&spec, &e).unwrap()).unwrap();
            let rhs = model.apply_cov(&algebra_embed(&spec, &e).unwrap());
            assert!(fro_norm(&(lhs - rhs)) < 1e-12);
        }
    }

    #[test]
    fn adjoint_identity() {
        let spec = random_spec(3, 3, 15);
        let op = ReducedOperator::new(&spec, true);
        let a = random_elem(spec.q(), 1, true).to_block();
        let b = random_elem(spec.q(), 2, true).to_block();
        let lhs = inner(&op.apply(&a), &b);
        let rhs = inner(&a, &op.apply_adjoint(&b));
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }
}
