//! Tensor PCA through the level-ℓ Kikuchi matrix. Rows and columns are
//! ℓ-subsets of [n] ranked in the combinatorial number system (co-lex);
//! tensor entries are p-subsets ranked the same way.

use std::io::Write;

use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanczos::{top_eigenpairs, LanczosOptions};
use crate::linalg::RMat;
use crate::rng::{rng_from_seed, sub_seed};

/// Default cap on C(n, ℓ)·k* stored nonzeros.
pub const KIKUCHI_MAX_NNZ: u64 = 50_000_000;

/// Binomial coefficients up to n, with overflow reported as an error.
#[derive(Clone, Debug)]
pub struct Binomial {
    rows: Vec<Vec<u64>>,
}

impl Binomial {
    pub fn new(n: usize) -> Self {
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
        for m in 0..=n {
            let mut row = vec![1u64; m + 1];
            for k in 1..m {
                row[k] = rows[m - 1][k - 1].saturating_add(rows[m - 1][k]);
            }
            rows.push(row);
        }
        Binomial { rows }
    }

    /// C(m, k), zero for k > m. Saturates at u64::MAX.
    pub fn get(&self, m: usize, k: usize) -> u64 {
        if k > m {
            0
        } else {
            self.rows[m][k]
        }
    }

    /// Co-lex rank of a strictly increasing subset.
    pub fn rank(&self, subset: &[usize]) -> u64 {
        subset.iter().enumerate().map(|(i, &s)| self.get(s, i + 1)).sum()
    }

    pub fn unrank(&self, mut r: u64, k: usize, out: &mut Vec<usize>) {
        out.clear();
        out.resize(k, 0);
        let mut hi = self.rows.len() - 1;
        for i in (0..k).rev() {
            let mut s = hi;
            while self.get(s, i + 1) > r {
                s -= 1;
            }
            out[i] = s;
            r -= self.get(s, i + 1);
            hi = s.saturating_sub(1);
        }
    }
}

/// Exact binomial C(n, k); errors when it does not fit in u64.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::invalid(format!("C({n}, {k}) overflows u64")));
        }
    }
    Ok(acc as u64)
}

/// Calls `f` on every k-subset of 0..m in lexicographic order.
pub fn for_each_combination(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + m - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KikuchiParams {
    pub k_star: u64,
    pub sigma_sq: u64,
    pub v_sq: u64,
    /// s_1 = s1_factor·λ.
    pub s1_factor: u64,
    pub r: u64,
}

fn check_range(n: usize, p: usize, ell: usize) -> Result<()> {
    if p < 4 || p % 2 != 0 {
        return Err(Error::invalid(format!("p must be even and at least 4, got {p}")));
    }
    if 2 * ell < p || 4 * ell >= 3 * p {
        return Err(Error::invalid(format!("need p/2 ≤ ℓ < 3p/4, got p = {p}, ℓ = {ell}")));
    }
    if n < ell + p / 2 {
        return Err(Error::invalid(format!("n = {n} too small for ℓ = {ell}, p = {p}")));
    }
    Ok(())
}

pub fn kikuchi_params(n: usize, p: usize, ell: usize) -> Result<KikuchiParams> {
    check_range(n, p, ell)?;
    let h = p / 2;
    let k_star = binomial(ell, h)?.checked_mul(binomial(n - ell, h)?).ok_or_else(|| Error::invalid("k* overflows"))?;
    let v_sq = binomial(p, h)?.checked_mul(binomial(n - p, ell - h)?).ok_or_else(|| Error::invalid("v² overflows"))?;
    Ok(KikuchiParams { k_star, sigma_sq: k_star, v_sq, s1_factor: k_star, r: binomial(n, ell - h)? })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorPcaInstance {
    pub n: usize,
    pub p: usize,
    pub ell: usize,
    pub lambda: f64,
    pub x: Vec<i8>,
    pub seed: u64,
}

impl TensorPcaInstance {
    /// Signal x with uniform signs drawn from `seed`.
    pub fn new(n: usize, p: usize, ell: usize, lambda: f64, seed: u64) -> Result<Self> {
        let mut r = rng_from_seed(sub_seed(seed, 0));
        let x = (0..n).map(|_| if r.random::<bool>() { 1 } else { -1 }).collect();
        Self::with_signal(n, p, ell, lambda, x, seed)
    }

    pub fn with_signal(n: usize, p: usize, ell: usize, lambda: f64, x: Vec<i8>, seed: u64) -> Result<Self> {
        check_range(n, p, ell)?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be finite and nonnegative, got {lambda}")));
        }
        if x.len() != n || x.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("x must be a ±1 vector of length n"));
        }
        Ok(TensorPcaInstance { n, p, ell, lambda, x, seed })
    }

    /// Y_U = λ x^U + Z_U over p-subsets U in co-lex order; Z is omitted
    /// when `noise` is false.
    pub fn tensor(&self, noise: bool) -> Result<Vec<f64>> {
        let count = binomial(self.n, self.p)?;
        if count > KIKUCHI_MAX_NNZ {
            return Err(Error::MemoryCap(format!("C({}, {}) = {count} tensor entries", self.n, self.p)));
        }
        let binom = Binomial::new(self.n);
        let mut r = rng_from_seed(sub_seed(self.seed, 1));
        let mut u = Vec::with_capacity(self.p);
        Ok((0..count)
            .map(|k| {
                binom.unrank(k, self.p, &mut u);
                let sign: i32 = u.iter().map(|&i| self.x[i] as i32).product();
                let z: f64 = if noise { StandardNormal.sample(&mut r) } else { 0.0 };
                self.lambda * sign as f64 + z
            })
            .collect())
    }
}

/// Symmetric sparse matrix in CSR form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSym {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseSym {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().zip(&self.vals[r]).map(|(&c, &v)| (c as usize, v))
    }

    pub fn matvec(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        for i in 0..self.dim {
            y[i] = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.vals.iter_mut().for_each(|v| *v *= s);
    }

    pub fn to_dense(&self) -> RMat {
        let mut m = RMat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `# <header>` then one `row col value` line per stored entry.
    pub fn write_coordinate<W: Write>(&self, mut w: W, header: &str) -> Result<()> {
        writeln!(w, "# {header}")?;
        writeln!(w, "# dim={} nnz={}", self.dim, self.nnz())?;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                writeln!(w, "{i} {j} {v:.16e}")?;
            }
        }
        Ok(())
    }
}

/// M_{S,T} = Y_{S△T} when |S△T| = p. Each row enumerates its k* neighbours
/// directly: drop p/2 elements of S, add p/2 from its complement.
pub fn kikuchi_matrix(inst: &TensorPcaInstance) -> Result<SparseSym> {
    kikuchi_matrix_with(inst, true, KIKUCHI_MAX_NNZ)
}

pub fn kikuchi_matrix_with(inst: &TensorPcaInstance, noise: bool, max_nnz: u64) -> Result<SparseSym> {
    let params = kikuchi_params(inst.n, inst.p, inst.ell)?;
    let dim = binomial(inst.n, inst.ell)?;
    let nnz = dim.checked_mul(params.k_star).unwrap_or(u64::MAX);
    if nnz > max_nnz || dim > u32::MAX as u64 {
        return Err(Error::MemoryCap(format!("Kikuchi matrix with C({}, {}) = {dim} rows and {nnz} nonzeros", inst.n, inst.ell)));
    }
    let y = inst.tensor(noise)?;
    Ok(kikuchi_from_tensor(inst.n, inst.p, inst.ell, &y, dim as usize, params.k_star as usize))
}

fn kikuchi_from_tensor(n: usize, p: usize, ell: usize, y: &[f64], dim: usize, k_star: usize) -> SparseSym {
    let binom = Binomial::new(n);
    let h = p / 2;
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::with_capacity(dim * k_star);
    let mut vals = Vec::with_capacity(dim * k_star);
    row_ptr.push(0);
    let mut s = Vec::new();
    let mut entries: Vec<(u32, f64)> = Vec::with_capacity(k_star);
    let mut t = Vec::with_capacity(ell);
    let mut u = Vec::with_capacity(p);
    for row in 0..dim as u64 {
        binom.unrank(row, ell, &mut s);
        let comp: Vec<usize> = (0..n).filter(|i| s.binary_search(i).is_err()).collect();
        entries.clear();
        for_each_combination(ell, h, |drop| {
            for_each_combination(comp.len(), h, |add| {
                t.clear();
                u.clear();
                let mut di = 0;
                for (i, &e) in s.iter().enumerate() {
                    if di < h && drop[di] == i {
                        u.push(e);
                        di += 1;
                    } else {
                        t.push(e);
                    }
                }
                for &a in add {
                    t.push(comp[a]);
                    u.push(comp[a]);
                }
                t.sort_unstable();
                u.sort_unstable();
                entries.push((binom.rank(&t) as u32, y[binom.rank(&u) as usize]));
            });
        });
        entries.sort_unstable_by_key(|e| e.0);
        for &(c, v) in &entries {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    SparseSym { dim, row_ptr, cols, vals }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KikuchiTest {
    pub statistic: f64,
    pub threshold: f64,
    pub decision: bool,
    pub converged: bool,
}

/// λmax(k*^{-1/2} M) against 2 + n^{-1/5}.
pub fn kikuchi_test(m: &SparseSym, n: usize, p: usize, ell: usize) -> Result<KikuchiTest> {
    let params = kikuchi_params(n, p, ell)?;
    if m.dim() as u64 != binomial(n, ell)? {
        return Err(Error::dim(format!("matrix has dimension {}, expected C({n}, {ell})", m.dim())));
    }
    let threshold = 2.0 + (n as f64).powf(-0.2);
    if m.vals.iter().all(|&v| v == 0.0) {
        return Ok(KikuchiTest { statistic: 0.0, threshold, decision: false, converged: true });
    }
    let opts = LanczosOptions { tol: 1e-8, starts: 3, ..Default::default() };
    let top = top_eigenpairs(m.dim(), |x, y| m.matvec(x, y), &opts)?;
    let statistic = top.values[0] / (params.k_star as f64).sqrt();
    Ok(KikuchiTest { statistic, threshold, decision: statistic > threshold, converged: top.converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigvalsh_real;

    #[test]
    fn params_examples() {
        let k = kikuchi_params(10, 4, 2).unwrap();
        assert_eq!((k.k_star, k.v_sq, k.r), (28, 6, 1));
        assert_eq!(kikuchi_params(12, 4, 2).unwrap().k_star, 45);
        assert!(kikuchi_params(12, 4, 3).is_err());
        assert!(kikuchi_params(12, 5, 3).is_err());
        assert!(kikuchi_params(12, 4, 1).is_err());
    }

    #[test]
    fn ranking_roundtrip() {
        let b = Binomial::new(9);
        let mut seen = 0u64;
        let mut out = Vec::new();
        for_each_combination(9, 3, |s| {
            let r = b.rank(s);
            b.unrank(r, 3, &mut out);
            assert_eq!(out, s);
            seen += 1;
        });
        assert_eq!(seen, binomial(9, 3).unwrap());
        // co-lex: {0,1,2} first, {6,7,8} last
        assert_eq!(b.rank(&[0, 1, 2]), 0);
        assert_eq!(b.rank(&[6, 7, 8]), 83);
    }

    #[test]
    fn structure() {
        let inst = TensorPcaInstance::new(8, 6, 4, 0.7, 3).unwrap();
        let m = kikuchi_matrix(&inst).unwrap();
        let k = kikuchi_params(8, 6, 4).unwrap();
        assert_eq!(m.dim(), 70);
        for i in 0..m.dim() {
            assert_eq!(m.row(i).count() as u64, k.k_star);
            assert!(m.row(i).all(|(j, _)| j != i));
        }
        let d = m.to_dense();
        assert_eq!(d, d.transpose());
    }

    #[test]
    fn pure_signal_top_eigenvalue() {
        let (n, p, ell) = (9, 4, 2);
        let k = kikuchi_params(n, p, ell).unwrap();
        let inst = TensorPcaInstance::new(n, p, ell, 1.0, 5).unwrap();
        let m = kikuchi_matrix_with(&inst, false, KIKUCHI_MAX_NNZ).unwrap();
        let top = *eigvalsh_real(&m.to_dense()).last().unwrap();
        assert!((top - k.k_star as f64).abs() < 1e-9);
        let scaled = TensorPcaInstance { lambda: 3.0 / (k.k_star as f64).sqrt(), ..inst };
        let t = kikuchi_test(&kikuchi_matrix_with(&scaled, false, KIKUCHI_MAX_NNZ).unwrap(), n, p, ell).unwrap();
        assert!((t.statistic - 3.0).abs() < 1e-7 && t.decision);
    }

    #[test]
    fn zero_matrix_test() {
        let inst = TensorPcaInstance::new(8, 4, 2, 0.0, 1).unwrap();
        let m = kikuchi_matrix_with(&inst, false, KIKUCHI_MAX_NNZ).unwrap();
        let t = kikuchi_test(&m, 8, 4, 2).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert!(!t.decision);
    }

    #[test]
    fn memory_cap() {
        let inst = TensorPcaInstance::new(10, 4, 2, 1.0, 1).unwrap();
        assert!(matches!(kikuchi_matrix_with(&inst, true, 100), Err(Error::MemoryCap(_))));
    }

    #[test]
    fn coordinate_export() {
        let inst = TensorPcaInstance::new(6, 4, 2, 1.0, 2).unwrap();
        let m = kikuchi_matrix(&inst).unwrap();
        let mut buf = Vec::new();
        m.write_coordinate(&mut buf, "n=6 p=4 ell=2 seed=2").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# n=6 p=4 ell=2 seed=2\n"));
        assert_eq!(text.lines().count(), 2 + m.nnz());
    }
}
