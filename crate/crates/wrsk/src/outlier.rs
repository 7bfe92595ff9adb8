//! Observation outlyingness: LOF scores, per-cluster standardization, and the
//! translated biweight that maps standardized scores to weights in `[0, 1]`.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// Parameters of the LOF-based weighting pipeline.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LofParams {
    /// Neighborhood size for LOF.
    pub q: usize,
    /// Truncation point of the translated biweight.
    pub c: f64,
    /// Guard for zero reachability sums (exact duplicates).
    pub epsilon_density: f64,
    /// Apply the 1.4826 consistency factor to the MAD inside the biweight.
    pub scaled_mad: bool,
}

impl Default for LofParams {
    fn default() -> Self {
        LofParams {
            q: 10,
            c: 2.0,
            epsilon_density: 1e-10,
            scaled_mad: true,
        }
    }
}

impl LofParams {
    pub fn validate(&self) -> Result<()> {
        if self.q < 1 {
            return Err(Error::invalid("LofParams: q must be >= 1"));
        }
        if !(self.c > 0.0) {
            return Err(Error::invalid("LofParams: c must be > 0"));
        }
        if !(self.epsilon_density > 0.0) {
            return Err(Error::invalid("LofParams: epsilon_density must be > 0"));
        }
        Ok(())
    }
}

/// One entry of a q-nearest neighborhood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// q-nearest neighborhoods for every observation. Under distance ties at the
/// q-distance a neighborhood may hold more than `q` entries.
#[derive(Debug, Clone)]
pub struct NeighborTable {
    pub q: usize,
    pub neighbors: Vec<Vec<Neighbor>>,
}

impl NeighborTable {
    /// The q-distance of observation `i` (largest listed neighbor distance).
    pub fn q_distance(&self, i: usize) -> f64 {
        self.neighbors[i]
            .last()
            .map(|nb| nb.distance)
            .unwrap_or(0.0)
    }
}

/// Exact q-nearest neighborhoods under Euclidean distance, ties at the
/// q-distance included.
pub fn knn(x: ArrayView2<f64>, q: usize) -> Result<NeighborTable> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid("knn: need at least 2 observations"));
    }
    if q < 1 || q > n - 1 {
        return Err(Error::invalid(format!(
            "knn: q must satisfy 1 <= q <= n-1 (q={q}, n={n})"
        )));
    }
    let d = stats::pairwise_distances(x);
    let mut neighbors = Vec::with_capacity(n);
    for i in 0..n {
        let mut order: Vec<Neighbor> = (0..n)
            .filter(|&j| j != i)
            .map(|j| Neighbor {
                index: j,
                distance: d[[i, j]],
            })
            .collect();
        order.sort_by(|a, b| {
            a.distance
                .partial_cmp(&b.distance)
                .expect("non-finite distance")
                .then(a.index.cmp(&b.index))
        });
        let q_dist = order[q - 1].distance;
        order.retain(|nb| nb.distance <= q_dist);
        neighbors.push(order);
    }
    Ok(NeighborTable { q, neighbors })
}

/// LOF scores for every row of `x`: mean ratio of neighbor local reachability
/// density to own density. Duplicated points (zero reachability sum) get
/// their density capped at `1 / epsilon_density`, so a pair of duplicates
/// scores 1 rather than 0/0.
pub fn lof(x: ArrayView2<f64>, q: usize, params: &LofParams) -> Result<Vec<f64>> {
    params.validate()?;
    let table = knn(x, q)?;
    let n = x.nrows();
    let q_dist: Vec<f64> = (0..n).map(|i| table.q_distance(i)).collect();

    let mut lrd = vec![0.0; n];
    for i in 0..n {
        let nbs = &table.neighbors[i];
        let reach_sum: f64 = nbs
            .iter()
            .map(|nb| nb.distance.max(q_dist[nb.index]))
            .sum();
        lrd[i] = if reach_sum > 0.0 {
            nbs.len() as f64 / reach_sum
        } else {
            1.0 / params.epsilon_density
        };
    }

    let mut scores = vec![0.0; n];
    for i in 0..n {
        let nbs = &table.neighbors[i];
        let ratio_sum: f64 = nbs.iter().map(|nb| lrd[nb.index] / lrd[i]).sum();
        scores[i] = ratio_sum / nbs.len() as f64;
    }
    Ok(scores)
}

/// Standardize LOF scores over a member set: `(lof - mean) / sd` with the
/// sample standard deviation. A zero sd (perfectly homogeneous set) maps
/// every member to 0.
pub fn standardize_lof(scores: &[f64], members: &[usize]) -> Result<Vec<f64>> {
    if members.is_empty() {
        return Err(Error::invalid("standardize_lof: empty member set"));
    }
    let vals: Vec<f64> = members.iter().map(|&i| scores[i]).collect();
    let m = stats::mean(&vals);
    let sd = stats::sample_sd(&vals);
    if sd == 0.0 {
        return Ok(vec![0.0; vals.len()]);
    }
    Ok(vals.iter().map(|&v| (v - m) / sd).collect())
}

/// Translated biweight over a member-aligned vector of standardized scores.
///
/// `M = median + MAD` of the member values; weights are 1 at or below `M`,
/// 0 at or above `c`, and the smooth quartic in between. When `c <= M`
/// (pathological spread) the function degrades to a step at `M` and the
/// second return value is `true` so callers can flag the run.
pub fn biweight(lofstar: &[f64], c: f64, scaled_mad: bool) -> (Vec<f64>, bool) {
    assert!(!lofstar.is_empty(), "biweight: empty member set");
    let m = stats::median(lofstar) + stats::mad(lofstar, scaled_mad);
    if c <= m {
        let w = lofstar
            .iter()
            .map(|&v| if v <= m { 1.0 } else { 0.0 })
            .collect();
        return (w, true);
    }
    let w = lofstar
        .iter()
        .map(|&v| {
            if v >= c {
                0.0
            } else if v <= m {
                1.0
            } else {
                let u = (v - m) / (c - m);
                let t = 1.0 - u * u;
                t * t
            }
        })
        .collect();
    (w, false)
}
