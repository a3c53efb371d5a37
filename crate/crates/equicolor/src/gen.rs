//! Instance generators: the random tightness construction (n = k^(2a),
//! m = (1-eps) k^(3a-1), uniform k-subsets with replacement) and a
//! bounded-degree random model for exercising the pipeline.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{Hypergraph, Vertex};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("m*k = {mk} exceeds n*max_deg = {cap}: no such hypergraph exists")]
    DegreeBudgetExceeded { mk: usize, cap: usize },
    #[error("rejection sampling stalled after {attempts} attempts with {placed} of {m} edges placed")]
    RejectionStall { attempts: usize, placed: usize, m: usize },
}

/// Parameters of the random construction whose minimum vertex cover stays
/// large: n = k^(2a) vertices, m = (1-eps) k^(3a-1) edges, and the cover
/// size t_cover = (1-2 eps) n a ln(k) / k it is meant to defeat. Non-integer
/// values are rounded to nearest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightConstructionSpec {
    pub k: usize,
    pub a: f64,
    pub eps: f64,
    pub n: usize,
    pub m: usize,
    pub t_cover: usize,
}

impl TightConstructionSpec {
    pub fn new(k: usize, a: f64, eps: f64) -> Result<Self, GenError> {
        if k < 2 {
            return Err(GenError::InvalidInput("k must be at least 2"));
        }
        if a.is_nan() || a < 1.0 {
            return Err(GenError::InvalidInput("a must be at least 1"));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(GenError::InvalidInput("eps must lie in (0, 1)"));
        }
        let kf = k as f64;
        let n = kf.powf(2.0 * a).round() as usize;
        let m = ((1.0 - eps) * kf.powf(3.0 * a - 1.0)).round() as usize;
        let t_cover = ((1.0 - 2.0 * eps) * n as f64 * a * kf.ln() / kf).round().max(0.0) as usize;
        debug_assert!(n >= k);
        Ok(TightConstructionSpec { k, a, eps, n, m, t_cover })
    }

    /// Expected vertex degree mk/n, which the construction pins near
    /// (1-eps) k^a up to rounding.
    pub fn expected_degree(&self) -> f64 {
        self.m as f64 * self.k as f64 / self.n as f64
    }
}

/// A uniformly random k-subset of `1..=n`, sorted ascending.
///
/// Uniformity is the contract; the method switches between draw-and-dedup
/// (sparse case) and a partial Fisher-Yates shuffle (dense case).
pub fn uniform_ksubset<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<Vertex> {
    assert!(k <= n, "cannot sample {k} distinct vertices from {n}");
    let mut subset: Vec<Vertex>;
    if k * 2 <= n {
        let mut seen = std::collections::HashSet::with_capacity(k * 2);
        subset = Vec::with_capacity(k);
        while subset.len() < k {
            let v = 1 + rng.random_range(0..n as u64) as Vertex;
            if seen.insert(v) {
                subset.push(v);
            }
        }
    } else {
        let mut pool: Vec<Vertex> = (1..=n as Vertex).collect();
        for i in 0..k {
            let j = i + rng.random_range(0..(n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        subset = pool;
    }
    subset.sort_unstable();
    subset
}

/// The tightness construction: m independent uniform k-subsets of `1..=n`,
/// with replacement (the same edge can appear more than once).
pub fn gen_tight<R: Rng>(spec: &TightConstructionSpec, rng: &mut R) -> Hypergraph {
    let edges = (0..spec.m)
        .map(|_| uniform_ksubset(spec.n, spec.k, rng))
        .collect();
    Hypergraph::new(spec.n, spec.k, edges).expect("generated edges are valid by construction")
}

/// m uniform k-subsets, rejecting any draw that would push a vertex past
/// `max_deg`; each accepted edge is uniform among those still admissible.
/// Fails if `100*m` attempts cannot place all edges.
pub fn gen_bounded<R: Rng>(
    n: usize,
    k: usize,
    max_deg: usize,
    m: usize,
    rng: &mut R,
) -> Result<Hypergraph, GenError> {
    if k == 0 || k > n {
        return Err(GenError::InvalidInput("need 1 <= k <= n"));
    }
    if m * k > n * max_deg {
        return Err(GenError::DegreeBudgetExceeded {
            mk: m * k,
            cap: n * max_deg,
        });
    }
    let budget = 100 * m;
    let mut degrees = vec![0usize; n + 1];
    let mut edges = Vec::with_capacity(m);
    let mut attempts = 0;
    while edges.len() < m {
        if attempts >= budget {
            return Err(GenError::RejectionStall {
                attempts,
                placed: edges.len(),
                m,
            });
        }
        attempts += 1;
        let candidate = uniform_ksubset(n, k, rng);
        if candidate.iter().all(|&v| degrees[v as usize] < max_deg) {
            for &v in &candidate {
                degrees[v as usize] += 1;
            }
            edges.push(candidate);
        }
    }
    Ok(Hypergraph::new(n, k, edges).expect("generated edges are valid by construction"))
}
