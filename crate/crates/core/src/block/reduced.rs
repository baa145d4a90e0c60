//! The q-dimensional variational problems for the edge λ of the block
//! model and for the bulk edge λ_∅ of its null model, and the phase
//! classification built on them.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{BlockModelSpec, ReducedOperator};
use crate::error::{Error, Result};
use crate::free::{lehner_max_operator, LehnerOptions, LehnerSolution};
use crate::linalg::{eigh_real, eigvalsh_real, RMat};
use crate::optim::{lbfgs, LbfgsOptions};

#[derive(Clone, Debug, Serialize)]
pub struct ReducedSolution {
    pub value: f64,
    pub v_star: Vec<f64>,
    /// ‖1/v + B diag(c)(v − 1) − value·1‖_∞.
    pub kkt1_residual: f64,
    /// λ_max(K − diag(v)^{-2}) for λ_∅, λ_max(K − diag(v)^{-1}) for λ.
    pub kkt2_value: f64,
    pub converged: bool,
}

struct Problem {
    /// B diag(c).
    bc: RMat,
    /// diag(c)^{1/2}B diag(c)^{1/2}.
    k0: RMat,
    /// Matrix in the first max-term of the edge problem (K, possibly shifted).
    k: RMat,
    q: usize,
}

impl Problem {
    fn new(spec: &BlockModelSpec, k: RMat) -> Result<Self> {
        if spec.b().max() <= 0.0 {
            return Err(Error::invalid("B must be nonzero"));
        }
        let c = spec.c();
        let q = spec.q();
        Ok(Problem { bc: RMat::from_fn(q, q, |i, j| spec.b()[(i, j)] * c[j]), k0: spec.k_matrix(), k, q })
    }

    fn scale(&self) -> f64 {
        self.bc.amax().max(1.0)
    }

    fn f(&self, v: &DVector<f64>) -> DVector<f64> {
        let shift = &self.bc * v.map(|x| x - 1.0);
        DVector::from_fn(self.q, |i, _| 1.0 / v[i] + shift[i])
    }

    fn edge_matrix(&self, v: &DVector<f64>) -> RMat {
        let shift = &self.bc * v.map(|x| x - 1.0);
        &self.k + RMat::from_diagonal(&shift)
    }

    fn kkt2(&self, k: &RMat, v: &DVector<f64>, power: i32) -> f64 {
        let m = k - RMat::from_diagonal(&v.map(|x| x.powi(-power)));
        *eigvalsh_real(&m).last().unwrap()
    }

    /// Smoothed objective T log Σ exp(t_j/T) in u = log v over the terms
    /// f_i and, with `edge`, the eigenvalues of K + diag(B diag(c)(v − 1)).
    fn smoothed(&self, u: &DVector<f64>, t: f64, edge: bool) -> Option<(f64, DVector<f64>)> {
        if u.iter().any(|x| !x.is_finite() || x.abs() > 60.0) {
            return None;
        }
        let q = self.q;
        let v = u.map(f64::exp);
        let f = self.f(&v);
        let mut terms: Vec<f64> = f.iter().copied().collect();
        let mut eig = None;
        if edge {
            let (vals, vecs) = eigh_real(&self.edge_matrix(&v));
            terms.extend(vals.iter().copied());
            eig = Some((vals, vecs));
        }
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = terms.iter().map(|x| ((x - top) / t).exp()).collect();
        let z: f64 = w.iter().sum();
        let value = top + t * z.ln();
        let mut gv = DVector::zeros(q);
        for i in 0..q {
            let p = w[i] / z;
            // ∂f_i/∂v_k = −δ_ik/v_i² + (B diag c)_ik
            gv[i] -= p / (v[i] * v[i]);
            for k in 0..q {
                gv[k] += p * self.bc[(i, k)];
            }
        }
        if let Some((vals, vecs)) = eig {
            for j in 0..vals.len() {
                let p = w[q + j] / z;
                let y2 = vecs.column(j).map(|x| x * x);
                // ∂μ_j/∂v_k = (diag(c) B (y⊙y))_k
                gv += self.bc.transpose() * y2 * p;
            }
        }
        Some((value, gv.component_mul(&v)))
    }

    fn smoothed_minimize(&self, v0: &DVector<f64>, edge: bool) -> DVector<f64> {
        let mut u = v0.map(f64::ln);
        let scale = self.scale();
        let opts = LbfgsOptions { max_iter: 3000, grad_tol: 1e-12, ..Default::default() };
        let mut t = 0.1 * scale;
        while t >= 1e-8 * scale {
            let r = lbfgs(u.clone(), |x| self.smoothed(x, t, edge), &opts, |_| {});
            if r.f.is_finite() {
                u = r.x;
            }
            t *= 0.1;
        }
        u.map(f64::exp)
    }

    fn newton_bulk(&self, v0: &DVector<f64>) -> (DVector<f64>, f64) {
        let q = self.q;
        let residual = |v: &DVector<f64>, lam: f64, y: &DVector<f64>| -> DVector<f64> {
            let f = self.f(v);
            let h = &self.k0 * y - y.component_div(&v.map(|x| x * x));
            let mut r = DVector::zeros(2 * q + 1);
            for i in 0..q {
                r[i] = f[i] - lam;
                r[q + i] = h[i];
            }
            r[2 * q] = y.sum() - 1.0;
            r
        };
        let mut v = v0.clone();
        let mut lam = self.f(&v).max();
        let mut y = {
            let m = &self.k0 - RMat::from_diagonal(&v.map(|x| x.powi(-2)));
            let (_, vecs) = eigh_real(&m);
            let top = vecs.column(q - 1).map(f64::abs);
            let s = top.sum();
            top / s
        };
        let mut r = residual(&v, lam, &y);
        for _ in 0..100 {
            let rn = r.amax();
            if rn < 1e-15 * self.scale() {
                break;
            }
            let mut j = DMatrix::zeros(2 * q + 1, 2 * q + 1);
            for i in 0..q {
                for k in 0..q {
                    j[(i, k)] = self.bc[(i, k)];
                    j[(q + i, q + k)] = self.k0[(i, k)];
                }
                j[(i, i)] -= 1.0 / (v[i] * v[i]);
                j[(i, 2 * q)] = -1.0;
                j[(q + i, i)] = 2.0 * y[i] / v[i].powi(3);
                j[(q + i, q + i)] -= 1.0 / (v[i] * v[i]);
                j[(2 * q, q + i)] = 1.0;
            }
            let Some(step) = j.lu().solve(&(-&r)) else { break };
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let nv = &v + step.rows(0, q) * alpha;
                if nv.iter().all(|&x| x > 0.0) {
                    let ny = &y + step.rows(q, q) * alpha;
                    let nl = lam + alpha * step[2 * q];
                    let nr = residual(&nv, nl, &ny);
                    if nr.amax() < rn {
                        v = nv;
                        y = ny;
                        lam = nl;
                        r = nr;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (v, lam)
    }

    /// Newton on 1/v + B diag(c)(v − 1) = λ1, λ_max(K + diag(B diag(c)(v − 1))) = λ.
    /// Returns (v, λ, multipliers nonnegative).
    fn newton_edge(&self, v0: &DVector<f64>) -> (DVector<f64>, f64, bool) {
        let q = self.q;
        let eval = |v: &DVector<f64>, lam: f64| -> (DVector<f64>, DVector<f64>) {
            let f = self.f(v);
            let (vals, vecs) = eigh_real(&self.edge_matrix(v));
            let mut r = DVector::zeros(q + 1);
            for i in 0..q {
                r[i] = f[i] - lam;
            }
            r[q] = vals[q - 1] - lam;
            (r, vecs.column(q - 1).into_owned())
        };
        let mut v = v0.clone();
        let mut lam = self.f(&v).max().max(*eigvalsh_real(&self.edge_matrix(&v)).last().unwrap());
        let (mut r, mut y) = eval(&v, lam);
        let jacobian = |v: &DVector<f64>, y: &DVector<f64>| -> DMatrix<f64> {
            let mut j = DMatrix::zeros(q + 1, q + 1);
            let gy = self.bc.transpose() * y.map(|x| x * x);
            for i in 0..q {
                for k in 0..q {
                    j[(i, k)] = self.bc[(i, k)];
                }
                j[(i, i)] -= 1.0 / (v[i] * v[i]);
                j[(i, q)] = -1.0;
                j[(q, i)] = gy[i];
            }
            j[(q, q)] = -1.0;
            j
        };
        for _ in 0..100 {
            let rn = r.amax();
            if rn < 1e-15 * self.scale() {
                break;
            }
            let Some(step) = jacobian(&v, &y).lu().solve(&(-&r)) else { break };
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let nv = &v + step.rows(0, q) * alpha;
                if nv.iter().all(|&x| x > 0.0) {
                    let nl = lam + alpha * step[q];
                    let (nr, ny) = eval(&nv, nl);
                    if nr.amax() < rn {
                        v = nv;
                        lam = nl;
                        r = nr;
                        y = ny;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        // multipliers: Σ α_i ∇f_i + β ∇g = 0, Σ α + β = 1
        let jac = jacobian(&v, &y);
        let mut m = DMatrix::zeros(q + 1, q + 1);
        for k in 0..q {
            for i in 0..q {
                m[(k, i)] = jac[(i, k)];
            }
            m[(k, q)] = jac[(q, k)];
            m[(q, k)] = 1.0;
        }
        m[(q, q)] = 1.0;
        let mut rhs = DVector::zeros(q + 1);
        rhs[q] = 1.0;
        let ok = m.lu().solve(&rhs).map(|a| a.iter().all(|&x| x >= -1e-8)).unwrap_or(false);
        (v, lam, ok)
    }

    fn bulk_value(&self, v: &DVector<f64>) -> f64 {
        self.f(v).max()
    }

    fn edge_value(&self, v: &DVector<f64>) -> f64 {
        self.bulk_value(v).max(*eigvalsh_real(&self.edge_matrix(v)).last().unwrap())
    }

    fn solve_bulk(&self, start: &DVector<f64>) -> ReducedSolution {
        let v = self.smoothed_minimize(start, false);
        let (v, _) = self.newton_bulk(&v);
        let value = self.bulk_value(&v);
        let kkt1 = (self.f(&v) - DVector::from_element(self.q, value)).amax();
        let kkt2 = self.kkt2(&self.k0, &v, 2);
        ReducedSolution {
            value,
            v_star: v.iter().copied().collect(),
            kkt1_residual: kkt1,
            kkt2_value: kkt2,
            converged: kkt1 <= 1e-7 && kkt2.abs() <= 1e-6,
        }
    }

    fn solve_edge(&self, bulk: &ReducedSolution) -> ReducedSolution {
        let v0 = DVector::from_vec(bulk.v_star.clone());
        let test = self.kkt2(&self.k, &v0, 1);
        if test <= 1e-9 {
            return ReducedSolution { kkt2_value: test, ..bulk.clone() };
        }
        let v = self.smoothed_minimize(&v0, true);
        let (v, _, multipliers_ok) = self.newton_edge(&v);
        let value = self.edge_value(&v);
        let kkt1 = (self.f(&v) - DVector::from_element(self.q, value)).amax();
        let kkt2 = self.kkt2(&self.k, &v, 1);
        ReducedSolution {
            value,
            v_star: v.iter().copied().collect(),
            kkt1_residual: kkt1,
            kkt2_value: kkt2,
            converged: multipliers_ok && kkt1 <= 1e-7 && kkt2 <= 1e-6,
        }
    }
}

fn require(sol: ReducedSolution, what: &str) -> Result<ReducedSolution> {
    if sol.converged {
        Ok(sol)
    } else {
        Err(Error::NoConvergence { what: what.into(), iterations: 0, residual: sol.kkt1_residual.max(sol.kkt2_value.abs()) })
    }
}

/// λ_∅ = inf_{v>0} max_i (1/v + B diag(c)(v − 1))_i.
pub fn reduced_lambda0(spec: &BlockModelSpec) -> Result<ReducedSolution> {
    reduced_lambda0_from(spec, &DVector::from_element(spec.q(), 1.0))
}

/// As [`reduced_lambda0`], starting the descent at `start` > 0.
pub fn reduced_lambda0_from(spec: &BlockModelSpec, start: &DVector<f64>) -> Result<ReducedSolution> {
    if start.len() != spec.q() || start.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::invalid("start must be a positive q-vector"));
    }
    require(Problem::new(spec, spec.k_matrix())?.solve_bulk(start), "reduced λ_∅ solver")
}

/// λ = inf_{v>0} max{λ_max(K + diag(B diag(c)(v − 1))), λ_max(diag(v)^{-1} + diag(B diag(c)(v − 1)))}
/// with K = diag(c)^{1/2}B diag(c)^{1/2}.
pub fn reduced_lambda(spec: &BlockModelSpec) -> Result<ReducedSolution> {
    solve_lambda(spec, spec.k_matrix())
}

fn solve_lambda(spec: &BlockModelSpec, k: RMat) -> Result<ReducedSolution> {
    let p = Problem::new(spec, k)?;
    let bulk = require(p.solve_bulk(&DVector::from_element(spec.q(), 1.0)), "reduced λ_∅ solver")?;
    require(p.solve_edge(&bulk), "reduced λ solver")
}

/// λ_t: B replaced by B + t·11ᵀ in the first max-term only.
pub fn lambda_t(spec: &BlockModelSpec, t: f64) -> Result<f64> {
    let c = spec.c();
    let q = spec.q();
    let k = RMat::from_fn(q, q, |i, j| (c[i] * c[j]).sqrt() * (spec.b()[(i, j)] + t));
    Ok(solve_lambda(spec, k)?.value)
}

/// ((λ_0 − λ_{−t})/t, (λ_t − λ_0)/t), which bracket the limiting overlap
/// (1/d)|⟨z, v_max⟩|².
pub fn overlap_slope(spec: &BlockModelSpec, t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::invalid("t must be positive"));
    }
    let l0 = lambda_t(spec, 0.0)?;
    Ok(((l0 - lambda_t(spec, -t)?) / t, (lambda_t(spec, t)? - l0) / t))
}

/// The exact reduced Lehner problem for λ_max(X_free) (or X_∅,free).
pub fn reduced_lehner(spec: &BlockModelSpec, include_signal: bool, opts: &LehnerOptions) -> Result<LehnerSolution> {
    lehner_max_operator(&ReducedOperator::new(spec, include_signal), opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Phase {
    /// λ = λ_∅ < 1: no outlier.
    #[serde(rename = "a")]
    Subcritical,
    /// λ = λ_∅ = 1.
    #[serde(rename = "b")]
    Critical,
    /// λ_∅ < λ = 1: outlier at 1.
    #[serde(rename = "c")]
    Supercritical,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Subcritical => "a",
            Phase::Critical => "b",
            Phase::Supercritical => "c",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseReport {
    pub snr: f64,
    pub lambda: f64,
    pub lambda0: f64,
    pub phase: Phase,
    pub lambda0_bound: f64,
    pub error_radius: f64,
    pub perron_b: Vec<f64>,
    /// min b / max b.
    pub kappa: f64,
    /// Solver outputs agree with the phase read off from snr.
    pub consistent: bool,
}

/// Perron vector of B diag(c), normalized to max entry 1.
pub fn perron_vector(spec: &BlockModelSpec) -> DVector<f64> {
    let q = spec.q();
    let c = spec.c();
    let m = RMat::from_fn(q, q, |i, j| spec.b()[(i, j)] * c[j] + if i == j { 1.0 } else { 0.0 });
    let mut x = DVector::from_element(q, 1.0);
    for _ in 0..200_000 {
        let mut y = &m * &x;
        let s = y.max();
        y /= s;
        let delta = (&y - &x).amax();
        x = y;
        if delta < 1e-15 {
            break;
        }
    }
    x
}

pub fn phase_classify(spec: &BlockModelSpec) -> Result<PhaseReport> {
    let snr = *eigvalsh_real(&spec.k_matrix()).last().unwrap();
    let l0 = reduced_lambda0(spec)?;
    let l = reduced_lambda(spec)?;
    let phase = if (snr - 1.0).abs() <= 1e-9 {
        Phase::Critical
    } else if snr < 1.0 {
        Phase::Subcritical
    } else {
        Phase::Supercritical
    };
    let consistent = match phase {
        Phase::Subcritical => (l.value - l0.value).abs() <= 1e-6 && l.value < 1.0,
        Phase::Critical => (l.value - 1.0).abs() <= 1e-6 && (l0.value - 1.0).abs() <= 1e-6,
        Phase::Supercritical => (l.value - 1.0).abs() <= 1e-6 && l0.value < l.value,
    };
    let b = perron_vector(spec);
    let kappa = b.min() / b.max();
    let bsum = (spec.b() * DVector::from_element(spec.q(), 1.0)).amax();
    Ok(PhaseReport {
        snr,
        lambda: l.value,
        lambda0: l0.value,
        phase,
        lambda0_bound: 1.0 - kappa * (1.0 - snr.sqrt()).powi(2),
        error_radius: (8.0 * bsum / spec.d() as f64).sqrt(),
        perron_b: b.iter().copied().collect(),
        kappa,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::tests::random_spec;

    fn scalar(b: f64) -> BlockModelSpec {
        BlockModelSpec::with_ones(vec![10], RMat::from_element(1, 1, b)).unwrap()
    }

    fn two_block(b: [f64; 4], sizes: [usize; 2]) -> BlockModelSpec {
        BlockModelSpec::with_ones(sizes.to_vec(), RMat::from_row_slice(2, 2, &b)).unwrap()
    }

    #[test]
    fn scalar_bulk_edge() {
        for b in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let s = reduced_lambda0(&scalar(b)).unwrap();
            assert!((s.value - (2.0 * b.sqrt() - b)).abs() < 1e-10, "{b} {s:?}");
            assert!((s.v_star[0] - 1.0 / b.sqrt()).abs() < 1e-8);
        }
    }

    #[test]
    fn scalar_edge() {
        assert!((reduced_lambda(&scalar(0.25)).unwrap().value - 0.75).abs() < 1e-10);
        assert!((reduced_lambda(&scalar(1.0)).unwrap().value - 1.0).abs() < 1e-10);
        let s = reduced_lambda(&scalar(4.0)).unwrap();
        assert!((s.value - 1.0).abs() < 1e-10 && (s.v_star[0] - 0.25).abs() < 1e-8, "{s:?}");
    }

    #[test]
    fn two_block_phases() {
        let r = phase_classify(&two_block([2.0, 1.0, 1.0, 2.0], [6, 6])).unwrap();
        assert!((r.snr - 1.5).abs() < 1e-12);
        assert_eq!(r.phase, Phase::Supercritical);
        assert!(r.consistent && (r.lambda - 1.0).abs() < 1e-8 && r.lambda0 < 1.0);
        let r = phase_classify(&scalar(0.5)).unwrap();
        assert_eq!(r.phase, Phase::Subcritical);
        assert!((r.lambda0_bound - (1.0 - (1.0 - 0.5f64.sqrt()).powi(2))).abs() < 1e-12);
        assert!((r.lambda0 - r.lambda0_bound).abs() < 1e-9);
    }

    #[test]
    fn uniqueness_from_different_starts() {
        let spec = random_spec(77, 3, 30);
        let a = reduced_lambda0_from(&spec, &DVector::from_element(spec.q(), 1.0)).unwrap();
        let b = reduced_lambda0_from(&spec, &DVector::from_fn(spec.q(), |i, _| 0.3 + i as f64)).unwrap();
        for (x, y) in a.v_star.iter().zip(&b.v_star) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn lambda_t_cases() {
        assert!((lambda_t(&scalar(4.0), 0.0).unwrap() - reduced_lambda(&scalar(4.0)).unwrap().value).abs() < 1e-12);
        assert!(lambda_t(&scalar(4.0), -0.1).unwrap() < 1.0 - 1e-3);
        assert!((lambda_t(&scalar(1.0), 0.01).unwrap() - 1.0).abs() <= 1e-3);
        // q = 1, b = 1: λ_t = t + 1/(1 + t)
        assert!((lambda_t(&scalar(1.0), 0.01).unwrap() - (0.01 + 1.0 / 1.01)).abs() < 1e-10);
        let (lo, hi) = overlap_slope(&scalar(0.5), 0.01).unwrap();
        assert!(lo.abs() <= 1e-6 && hi.abs() <= 1e-6);
        assert!(overlap_slope(&scalar(4.0), 0.01).unwrap().0 > 0.0);
        assert!(overlap_slope(&scalar(4.0), 0.0).is_err());
    }

    #[test]
    fn reduced_lehner_matches_full() {
        let spec = random_spec(5, 2, 10);
        let full = crate::free::lehner_max(&crate::block::build_block_model(&spec, true).unwrap(), &LehnerOptions::default()).unwrap();
        let red = reduced_lehner(&spec, true, &LehnerOptions::default()).unwrap();
        assert!((full.value - red.value).abs() < 1e-6, "{} {}", full.value, red.value);
    }
}
