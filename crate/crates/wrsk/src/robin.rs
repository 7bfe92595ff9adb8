//! ROBIN initialization: pick cluster seeds that sit in dense regions and
//! are mutually far apart, using LOF to skip outliers.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outlier::{lof, LofParams};
use crate::stats::sq_dist;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RobinParams {
    /// Neighborhood size for the LOF screen.
    pub q: usize,
    /// Accept a candidate as a center when its LOF is at most this value.
    pub lof_accept: f64,
}

impl Default for RobinParams {
    fn default() -> Self {
        RobinParams {
            q: 10,
            lof_accept: 1.05,
        }
    }
}

impl RobinParams {
    pub fn validate(&self) -> Result<()> {
        if self.q < 1 {
            return Err(Error::invalid("RobinParams: q must be >= 1"));
        }
        if !(self.lof_accept > 1.0) {
            return Err(Error::invalid("RobinParams: lof_accept must exceed 1"));
        }
        Ok(())
    }
}

/// Deterministic ROBIN: the reference point is the coordinate-wise mean, and
/// candidates are visited in order of decreasing minimum distance to the
/// centers chosen so far. The first candidate whose LOF does not exceed
/// `lof_accept` is taken; when none qualifies the remaining candidate with
/// the smallest LOF is taken instead.
pub fn robin_init(x: ArrayView2<f64>, k: usize, params: &RobinParams) -> Result<Vec<usize>> {
    params.validate()?;
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid("robin_init: need at least 2 observations"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "robin_init: k must satisfy 1 <= k <= n (k={k}, n={n})"
        )));
    }

    let q = params.q.min(n - 1);
    let lof_scores = lof(x, q, &LofParams { q, ..LofParams::default() })?;

    let reference: Vec<f64> = (0..x.ncols())
        .map(|j| x.column(j).sum() / n as f64)
        .collect();

    // min squared distance of every observation to the chosen set, seeded
    // with the distance to the reference point
    let mut min_d: Vec<f64> = (0..n)
        .map(|i| {
            x.row(i)
                .iter()
                .zip(reference.iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum()
        })
        .collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut taken = vec![false; n];

    while chosen.len() < k {
        let mut order: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
        order.sort_by(|&a, &b| {
            min_d[b]
                .partial_cmp(&min_d[a])
                .expect("non-finite distance")
                .then(a.cmp(&b))
        });
        let pick = order
            .iter()
            .copied()
            .find(|&i| lof_scores[i] <= params.lof_accept)
            .unwrap_or_else(|| {
                // no candidate passes the LOF screen: take the least outlying
                *order
                    .iter()
                    .min_by(|&&a, &&b| lof_scores[a].partial_cmp(&lof_scores[b]).unwrap())
                    .expect("nonempty candidate list")
            });
        taken[pick] = true;
        chosen.push(pick);
        for i in 0..n {
            if !taken[i] {
                let d = sq_dist(x.row(i), x.row(pick));
                if d < min_d[i] {
                    min_d[i] = d;
                }
            }
        }
    }
    Ok(chosen)
}
