//! Label decoding from signed edge observations on a k-regular graph.

use std::collections::HashSet;

use nalgebra::DVector;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigvalsh_real, RMat};
use crate::rng::{rng_from_seed, sub_seed};

/// Simple undirected k-regular graph as sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularGraph {
    d: usize,
    k: usize,
    neighbors: Vec<Vec<usize>>,
}

impl RegularGraph {
    pub fn from_edges(d: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); d];
        let mut seen = HashSet::new();
        for &(a, b) in edges {
            if a >= d || b >= d || a == b {
                return Err(Error::invalid(format!("bad edge ({a}, {b})")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(format!("duplicate edge ({a}, {b})")));
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        neighbors.iter_mut().for_each(|n| n.sort_unstable());
        let k = neighbors.first().map_or(0, Vec::len);
        if let Some(i) = (0..d).find(|&i| neighbors[i].len() != k) {
            return Err(Error::invalid(format!("vertex {i} has degree {}, expected {k}", neighbors[i].len())));
        }
        Ok(RegularGraph { d, k, neighbors })
    }

    /// Circulant graph with offsets ±1..±w, plus the antipodal offset d/2
    /// when `antipode` is set (d even).
    pub fn circulant(d: usize, w: usize, antipode: bool) -> Result<Self> {
        if 2 * w + usize::from(antipode) >= d || (antipode && d % 2 != 0) || (antipode && w >= d / 2) {
            return Err(Error::invalid(format!("circulant graph with d = {d}, w = {w}, antipode = {antipode} is not simple")));
        }
        let mut edges = Vec::new();
        for i in 0..d {
            for o in 1..=w {
                edges.push((i, (i + o) % d));
            }
            if antipode && i < d / 2 {
                edges.push((i, i + d / 2));
            }
        }
        Self::from_edges(d, &edges)
    }

    /// k-regular graph obtained from a circulant one by 10|E| random
    /// double-edge switches, each rejected if it would create a loop or a
    /// multiple edge.
    pub fn random_regular(d: usize, k: usize, seed: u64) -> Result<Self> {
        let g = Self::circulant(d, k / 2, k % 2 == 1)?;
        let swaps = 10 * g.edges().len();
        Ok(g.switched(swaps, seed))
    }

    pub fn switched(&self, swaps: usize, seed: u64) -> Self {
        let mut edges = self.edges();
        let mut set: HashSet<(usize, usize)> = edges.iter().copied().collect();
        let mut r = rng_from_seed(seed);
        let norm = |a: usize, b: usize| (a.min(b), a.max(b));
        for _ in 0..swaps {
            let i = r.random_range(0..edges.len());
            let j = r.random_range(0..edges.len());
            let (a, b) = edges[i];
            let (c, e) = if r.random::<bool>() { edges[j] } else { (edges[j].1, edges[j].0) };
            if a == c || a == e || b == c || b == e || set.contains(&norm(a, c)) || set.contains(&norm(b, e)) {
                continue;
            }
            set.remove(&edges[i]);
            set.remove(&edges[j]);
            edges[i] = norm(a, c);
            edges[j] = norm(b, e);
            set.insert(edges[i]);
            set.insert(edges[j]);
        }
        Self::from_edges(self.d, &edges).expect("switches preserve regularity")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Edges (i, j) with i < j, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.d).flat_map(|i| self.neighbors[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j))).collect()
    }

    pub fn adjacency(&self) -> RMat {
        let mut a = RMat::zeros(self.d, self.d);
        for (i, j) in self.edges() {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// k − λ₂(A).
    pub fn spectral_gap(&self) -> f64 {
        let e = eigvalsh_real(&self.adjacency());
        if e.len() < 2 {
            return 0.0;
        }
        self.k as f64 - e[e.len() - 2]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDecodingInstance {
    pub graph: RegularGraph,
    pub p: f64,
    pub x: Vec<i8>,
    pub seed: u64,
}

impl GraphDecodingInstance {
    /// Labels x with uniform signs from `seed`.
    pub fn new(graph: RegularGraph, p: f64, seed: u64) -> Result<Self> {
        let mut r = rng_from_seed(sub_seed(seed, 0));
        let x = (0..graph.d()).map(|_| if r.random::<bool>() { 1 } else { -1 }).collect();
        Self::with_labels(graph, p, x, seed)
    }

    pub fn with_labels(graph: RegularGraph, p: f64, x: Vec<i8>, seed: u64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::invalid(format!("flip probability must lie in [0, 1/2], got {p}")));
        }
        if x.len() != graph.d() || x.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("labels must be a ±1 vector of length d"));
        }
        Ok(GraphDecodingInstance { graph, p, x, seed })
    }
}

/// p = 1/2 − θ/(2√k).
pub fn flip_probability(theta: f64, k: usize) -> Result<f64> {
    let p = 0.5 - 0.5 * theta / (k as f64).sqrt();
    if !(theta >= 0.0) || p < 0.0 {
        return Err(Error::invalid(format!("theta must lie in [0, √k], got {theta}")));
    }
    Ok(p)
}

/// θ' = √k(1 − 2p)/√(4p(1 − p)); infinite at p = 0.
pub fn theta_prime(k: usize, p: f64) -> f64 {
    if p == 0.0 {
        return f64::INFINITY;
    }
    (k as f64).sqrt() * (1.0 - 2.0 * p) / (4.0 * p * (1.0 - p)).sqrt()
}

#[derive(Clone, Debug)]
pub struct DecodeModel {
    pub y: RMat,
    /// Y/√(4kp(1 − p)); at p = 0, where the noise vanishes, Y/√k.
    pub y_prime: RMat,
    pub theta_prime: f64,
    pub theta_infinite: bool,
}

pub fn decode_build(inst: &GraphDecodingInstance) -> DecodeModel {
    let g = &inst.graph;
    let mut r = rng_from_seed(sub_seed(inst.seed, 1));
    let mut y = RMat::zeros(g.d(), g.d());
    for (i, j) in g.edges() {
        let xi = if r.random::<f64>() < inst.p { -1.0 } else { 1.0 };
        let v = (inst.x[i] * inst.x[j]) as f64 * xi;
        y[(i, j)] = v;
        y[(j, i)] = v;
    }
    let k = g.k() as f64;
    let scale = if inst.p == 0.0 { k.sqrt() } else { (4.0 * k * inst.p * (1.0 - inst.p)).sqrt() };
    let theta_prime = theta_prime(g.k(), inst.p);
    DecodeModel { y_prime: &y / scale, y, theta_prime, theta_infinite: theta_prime.is_infinite() }
}

/// Randomized rounding with c = 2/√ε: x̂_i = ±1 with mean
/// (v_i√d/c)·1{|v_i|√d ≤ c}.
pub fn decode_round(v: &DVector<f64>, epsilon: f64, seed: u64) -> Result<DVector<f64>> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if (v.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!("v must be a unit vector, has norm {}", v.norm())));
    }
    let d = v.len() as f64;
    let c = 2.0 / epsilon.sqrt();
    let mut r = rng_from_seed(seed);
    Ok(v.map(|vi| {
        let a = vi * d.sqrt();
        let mean = if a.abs() <= c { a / c } else { 0.0 };
        if r.random::<f64>() < 0.5 * (1.0 + mean) {
            1.0
        } else {
            -1.0
        }
    }))
}

/// (1/d)|⟨x, v⟩|².
pub fn label_overlap(x: &[i8], v: &DVector<f64>) -> f64 {
    let ip: f64 = x.iter().zip(v.iter()).map(|(&a, &b)| a as f64 * b).sum();
    ip * ip / x.len() as f64
}
