use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigen_residual, eigh, hermitian_deviation, hermitian_norm, CMat};

/// Eigenvalues with multiplicity, nondecreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSet {
    eigenvalues: Vec<f64>,
}

impl SpectrumSet {
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite eigenvalue"));
        }
        eigenvalues.sort_by(f64::total_cmp);
        Ok(SpectrumSet { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn max(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    pub fn min(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Disjoint closed intervals in increasing order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    intervals: Vec<Interval>,
}

impl SupportSet {
    /// Sorts the intervals and merges any that overlap or touch.
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self> {
        if intervals.iter().any(|iv| !(iv.lo <= iv.hi) || !iv.lo.is_finite() || !iv.hi.is_finite()) {
            return Err(Error::invalid("interval with lo > hi or non-finite endpoint"));
        }
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        Ok(SupportSet { intervals: out })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn lo(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.lo)
    }

    pub fn hi(&self) -> Option<f64> {
        self.intervals.last().map(|i| i.hi)
    }

    /// Merge components separated by gaps shorter than `gap`.
    pub fn merge_gaps(&self, gap: f64) -> SupportSet {
        let mut out: Vec<Interval> = Vec::new();
        for &iv in &self.intervals {
            match out.last_mut() {
                Some(last) if iv.lo - last.hi < gap => last.hi = iv.hi,
                _ => out.push(iv),
            }
        }
        SupportSet { intervals: out }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.lo <= x && x <= i.hi)
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|i| i.hi - i.lo).sum()
    }
}

/// A finite union of closed intervals (points are degenerate intervals).
pub trait ClosedSet {
    /// Sorted, disjoint components.
    fn components(&self) -> Vec<Interval>;
}

impl ClosedSet for SpectrumSet {
    fn components(&self) -> Vec<Interval> {
        let mut v: Vec<Interval> = Vec::with_capacity(self.eigenvalues.len());
        for &x in &self.eigenvalues {
            if v.last().map(|l| l.hi < x).unwrap_or(true) {
                v.push(Interval { lo: x, hi: x });
            }
        }
        v
    }
}

impl ClosedSet for SupportSet {
    fn components(&self) -> Vec<Interval> {
        self.intervals.clone()
    }
}

/// Distance from x to a sorted disjoint union of intervals.
fn dist_to(x: f64, b: &[Interval]) -> f64 {
    // first component with hi ≥ x
    let k = b.partition_point(|iv| iv.hi < x);
    let mut d = f64::INFINITY;
    if k < b.len() {
        d = d.min(if b[k].lo <= x { 0.0 } else { b[k].lo - x });
    }
    if k > 0 {
        d = d.min(x - b[k - 1].hi);
    }
    d
}

/// sup_{x ∈ A} dist(x, B). On each component of A, dist(·, B) is piecewise
/// linear with local maxima only at the component's endpoints and at the
/// midpoints of the gaps of B.
fn directed(a: &[Interval], b: &[Interval]) -> f64 {
    let mut worst = 0.0f64;
    for iv in a {
        worst = worst.max(dist_to(iv.lo, b)).max(dist_to(iv.hi, b));
        if iv.hi > iv.lo {
            let start = b.partition_point(|g| g.hi < iv.lo);
            let mut k = start.saturating_sub(1);
            while k + 1 < b.len() && b[k].hi <= iv.hi {
                let mid = 0.5 * (b[k].hi + b[k + 1].lo);
                if iv.lo <= mid && mid <= iv.hi {
                    worst = worst.max(dist_to(mid, b));
                }
                k += 1;
            }
        }
    }
    worst
}

/// Exact Hausdorff distance between two nonempty finite unions of closed
/// intervals.
pub fn hausdorff_distance(a: &dyn ClosedSet, b: &dyn ClosedSet) -> Result<f64> {
    let ca = a.components();
    let cb = b.components();
    if ca.is_empty() || cb.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(directed(&ca, &cb).max(directed(&cb, &ca)))
}

/// All eigenvalues of a self-adjoint matrix, each pair verified to satisfy
/// ‖Av − λv‖ ≤ 1e-8‖A‖.
pub fn eigen_spectrum(m: &CMat) -> Result<SpectrumSet> {
    if m.nrows() != m.ncols() {
        return Err(Error::dim("matrix is not square"));
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let dev = hermitian_deviation(m);
    if dev > 1e-12 * scale {
        return Err(Error::NotSelfAdjoint(dev));
    }
    let e = eigh(m);
    let norm = hermitian_norm(m);
    let res = eigen_residual(m, &e);
    if res > 1e-8 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NoConvergence { what: "Hermitian eigensolver".into(), iterations: 0, residual: res });
    }
    SpectrumSet::new(e.values)
}
