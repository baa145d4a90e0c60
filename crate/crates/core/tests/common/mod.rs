//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use freespec::apps::{kikuchi_params, TensorPcaInstance};
use freespec::block::BlockModelSpec;
use freespec::free::{default_eta, default_threshold, free_moment, free_support};
use freespec::iso::{bbp_overlap, bbp_value, perturb_overlap};
use freespec::linalg::{c, eigvalsh_real, ntrace, C64, CMat, RMat};
use freespec::model::{compute_parameters, hausdorff_distance, sample, GaussianSeriesModel, Interval, SpectrumSet, SupportSet};
use freespec::rng::rng_from_seed;
use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gauss(r: &mut impl Rng) -> f64 {
    StandardNormal.sample(r)
}

/// (G + G*)/2 with iid complex (or real) Gaussian G, times `scale`.
pub fn random_hermitian(d: usize, real: bool, scale: f64, r: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| C64::new(gauss(r), if real { 0.0 } else { gauss(r) }));
    (&g + g.adjoint()) * c(0.5 * scale)
}

pub fn random_model(seed: u64, centered: bool) -> GaussianSeriesModel {
    let mut r = rng_from_seed(seed);
    let d = r.random_range(2..=5);
    let n = r.random_range(1..=4);
    let real = r.random_bool(0.5);
    let a0 = if centered { CMat::zeros(d, d) } else { random_hermitian(d, real, r.random_range(0.0..2.0), &mut r) };
    let coeffs = (0..n).map(|_| random_hermitian(d, real, r.random_range(0.1..1.0) / (d as f64).sqrt(), &mut r)).collect();
    GaussianSeriesModel::from_dense(a0, coeffs).unwrap()
}

/// q ≤ 3 blocks, d ≤ 60, B with positive diagonal.
pub fn random_block_spec(seed: u64) -> BlockModelSpec {
    let mut r = rng_from_seed(seed);
    let q = r.random_range(1..=3);
    let mut sizes: Vec<usize> = (0..q).map(|_| r.random_range(5..=20)).collect();
    sizes[0] = sizes[0].max(5);
    let mut b = RMat::zeros(q, q);
    for i in 0..q {
        b[(i, i)] = r.random_range(0.3..3.0);
        for j in 0..i {
            let v = r.random_range(0.1..2.0);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    BlockModelSpec::with_ones(sizes, b).unwrap()
}

/// Largest violation of the difference-quotient bounds on B over an
/// n×n grid θ ∈ (0, 3], t ∈ (0, 1].
pub fn bderiv_violation(n: usize) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 1..=n {
        let th = 3.0 * i as f64 / n as f64;
        let slope = bbp_overlap(th);
        for j in 1..=n {
            let t = j as f64 / n as f64;
            let fwd = (bbp_value(th + t).unwrap() - bbp_value(th).unwrap()) / t;
            worst = worst.max(fwd - slope - t);
            if th >= t {
                let bwd = (bbp_value(th).unwrap() - bbp_value(th - t).unwrap()) / t;
                worst = worst.max(slope - t - bwd);
            }
        }
    }
    worst
}

/// A random Hermitian X and projection P; returns the sandwich violation.
pub fn perturb_violation(seed: u64) -> f64 {
    let mut r = rng_from_seed(seed);
    let d = r.random_range(2..=10);
    let x = random_hermitian(d, r.random_bool(0.5), 1.0, &mut r);
    let rank = r.random_range(1..=d);
    let q = CMat::from_fn(d, rank, |_, _| C64::new(gauss(&mut r), gauss(&mut r))).qr().q();
    let p = &q * q.adjoint();
    let t = r.random_range(1e-3..2.0);
    let o = perturb_overlap(&x, &p, t).unwrap();
    (o.lower - o.point).max(o.point - o.upper)
}

/// How far free_support sticks out of sp(A0) + (2σ + 10η)[−1, 1].
pub fn spcov_violation(model: &GaussianSeriesModel) -> f64 {
    let eta = default_eta(model);
    let sup = free_support(model, eta, default_threshold(model)).unwrap();
    let sigma = compute_parameters(model).sigma;
    let ev = freespec::linalg::eigvalsh(model.a0());
    let pad = 2.0 * sigma + 10.0 * eta;
    let mut worst = f64::NEG_INFINITY;
    for iv in sup.intervals() {
        for x in [iv.lo, iv.hi, 0.5 * (iv.lo + iv.hi)] {
            let dist = ev.iter().map(|e| (x - e).abs()).fold(f64::INFINITY, f64::min);
            worst = worst.max(dist - pad);
        }
    }
    worst
}

pub fn random_sets(seed: u64) -> (SpectrumSet, SupportSet) {
    let mut r = rng_from_seed(seed);
    let k = r.random_range(1..=8);
    let pts: Vec<f64> = (0..k).map(|_| r.random_range(-3.0..3.0)).collect();
    let m = r.random_range(1..=4);
    let mut ends: Vec<f64> = (0..2 * m).map(|_| r.random_range(-3.0..3.0)).collect();
    ends.sort_by(f64::total_cmp);
    let ivs = ends.chunks(2).map(|w| Interval { lo: w[0], hi: w[1] }).collect();
    (SpectrumSet::new(pts).unwrap(), SupportSet::new(ivs).unwrap())
}

/// Hausdorff distance with the interval side discretized at spacing h.
pub fn hausdorff_grid(a: &SpectrumSet, b: &SupportSet, h: f64) -> f64 {
    let pts = a.eigenvalues();
    let to_pts = |x: f64| pts.iter().map(|p| (x - p).abs()).fold(f64::INFINITY, f64::min);
    let to_ivs = |x: f64| b.intervals().iter().map(|iv| if x < iv.lo { iv.lo - x } else if x > iv.hi { x - iv.hi } else { 0.0 }).fold(f64::INFINITY, f64::min);
    let mut worst = pts.iter().map(|&p| to_ivs(p)).fold(0.0, f64::max);
    for iv in b.intervals() {
        let steps = ((iv.hi - iv.lo) / h).ceil() as usize;
        for k in 0..=steps {
            let x = (iv.lo + k as f64 * h).min(iv.hi);
            worst = worst.max(to_pts(x));
        }
    }
    worst
}

pub fn hausdorff_gap(seed: u64, h: f64) -> f64 {
    let (a, b) = random_sets(seed);
    (hausdorff_distance(&a, &b).unwrap() - hausdorff_grid(&a, &b, h)).abs()
}

pub struct MomentCheck {
    pub p: usize,
    pub empirical: f64,
    pub std_err: f64,
    pub lower: f64,
    pub free: f64,
    pub v_tilde: f64,
}

impl MomentCheck {
    fn root(&self, x: f64) -> f64 {
        x.max(0.0).powf(1.0 / (2 * self.p) as f64)
    }

    /// [tr((EX²)^p)]^{1/2p} ≤ E[tr X^{2p}]^{1/2p} ≤ √(2p)[tr((EX²)^p)]^{1/2p}, up to 3 standard errors.
    pub fn nck_ok(&self) -> bool {
        let (lo, hi) = (self.root(self.empirical - 3.0 * self.std_err), self.root(self.empirical + 3.0 * self.std_err));
        let base = self.root(self.lower);
        hi >= base * (1.0 - 1e-12) && lo <= (2.0 * self.p as f64).sqrt() * base
    }

    /// |E[tr X^{2p}]^{1/2p} − (free moment)^{1/2p}| ≤ 2p^{3/4}ṽ, up to 3 standard errors.
    pub fn free_ok(&self) -> bool {
        let (lo, hi) = (self.root(self.empirical - 3.0 * self.std_err), self.root(self.empirical + 3.0 * self.std_err));
        let f = self.root(self.free);
        let slack = 2.0 * (self.p as f64).powf(0.75) * self.v_tilde;
        hi >= f - slack && lo <= f + slack
    }
}

/// Moment checks for a centered d = 16 model, p = 1, 2, 3.
pub fn moment_checks(seed: u64, samples: usize) -> Vec<MomentCheck> {
    let mut r = rng_from_seed(seed);
    let d = 16;
    let real = r.random_bool(0.5);
    let n = r.random_range(2..=6);
    let coeffs: Vec<CMat> = (0..n).map(|_| random_hermitian(d, real, r.random_range(0.2..1.0) / (d as f64).sqrt(), &mut r)).collect();
    let model = GaussianSeriesModel::from_dense(CMat::zeros(d, d), coeffs).unwrap();
    let params = compute_parameters(&model);
    let ex2 = model.apply_cov(&CMat::identity(d, d));
    let draws: Vec<CMat> = (0..samples).map(|k| sample(&model, freespec::rng::sub_seed(seed, k as u64))).collect();
    (1..=3)
        .map(|p| {
            let vals: Vec<f64> = draws
                .iter()
                .map(|x| {
                    let x2 = x * x;
                    let mut m = x2.clone();
                    for _ in 1..p {
                        m = &m * &x2;
                    }
                    ntrace(&m).re
                })
                .collect();
            let mean = vals.iter().sum::<f64>() / samples as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
            let mut pw = ex2.clone();
            for _ in 1..p {
                pw = &pw * &ex2;
            }
            MomentCheck {
                p,
                empirical: mean,
                std_err: (var / samples as f64).sqrt(),
                lower: ntrace(&pw).re,
                free: free_moment(&model, 2 * p).unwrap(),
                v_tilde: params.v_tilde,
            }
        })
        .collect()
}

fn popcount(x: u32) -> usize {
    x.count_ones() as usize
}

fn subsets(n: usize, k: usize) -> Vec<u32> {
    (0u32..1 << n).filter(|&m| popcount(m) == k).collect()
}

pub struct KikuchiBrute {
    /// max |E[(M−EM)²] − σ²·I| entrywise.
    pub isotropy_error: f64,
    /// max over p-sets U of #{(S, T) : S△T = U}, i.e. ‖Cov(M)‖.
    pub v_sq: u64,
    /// s_{r+1} / s_1 for the singular values of EM.
    pub low_rank_ratio: f64,
    pub r: u64,
}

/// Exact second-moment structure of the Kikuchi matrix by enumeration over
/// bitmasks, with unit-variance noise.
pub fn kikuchi_brute(n: usize, p: usize, ell: usize) -> KikuchiBrute {
    let params = kikuchi_params(n, p, ell).unwrap();
    let rows = subsets(n, ell);
    let us = subsets(n, p);
    let dim = rows.len();
    // E[(M − EM)²]_{ST} = Σ_R E[Z_{S△R} Z_{R△T}] = #{R : |S△R| = p, S△R = R△T}
    let mut iso_err: f64 = 0.0;
    for (i, &s) in rows.iter().enumerate() {
        for (j, &t) in rows.iter().enumerate() {
            let cnt = rows.iter().filter(|&&rr| popcount(s ^ rr) == p && (s ^ rr) == (rr ^ t)).count() as f64;
            let want = if i == j { params.sigma_sq as f64 } else { 0.0 };
            iso_err = iso_err.max((cnt - want).abs());
        }
    }
    let v_sq = us.iter().map(|&u| rows.iter().filter(|&&s| rows.contains(&(s ^ u))).count() as u64).max().unwrap();
    // EM up to λ: x_S x_T [|S△T| = p]; the signs do not change singular values
    let k = RMat::from_fn(dim, dim, |i, j| if popcount(rows[i] ^ rows[j]) == p { 1.0 } else { 0.0 });
    let mut sv: Vec<f64> = eigvalsh_real(&k).into_iter().map(f64::abs).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let r = params.r as usize;
    let ratio = if r < sv.len() { sv[r] / sv[0] } else { 0.0 };
    KikuchiBrute { isotropy_error: iso_err, v_sq, low_rank_ratio: ratio, r: params.r }
}

/// Top eigenvalue of a spiked Kikuchi matrix at the given λ√k*, normalized.
pub fn kikuchi_decision(n: usize, p: usize, ell: usize, scaled_lambda: f64, seed: u64) -> freespec::apps::KikuchiTest {
    let k = kikuchi_params(n, p, ell).unwrap();
    let inst = TensorPcaInstance::new(n, p, ell, scaled_lambda / (k.k_star as f64).sqrt(), seed).unwrap();
    freespec::apps::kikuchi_test(&freespec::apps::kikuchi_matrix(&inst).unwrap(), n, p, ell).unwrap()
}

pub fn ones(d: usize) -> DVector<f64> {
    DVector::from_element(d, 1.0)
}
