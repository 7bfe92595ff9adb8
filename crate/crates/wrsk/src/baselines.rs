//! Baseline clusterers: plain k-means, trimmed k-means, sparse k-means, and
//! a double-trimming robust sparse k-means. All use ROBIN initialization so
//! comparisons isolate the algorithms rather than the seeding.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::fit::{
    update_variable_weights, wcss_per_variable, weighted_assign_with_distances, weighted_bcss,
    weighted_centers,
};
use crate::model::ClusterModel;
use crate::robin::{robin_init, RobinParams};

/// Convergence settings shared by the sparse baselines.
const W_TOL: f64 = 1e-4;
const OUTER_MAX: usize = 20;

/// Trimming level for the trimming-based baselines.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct TrimConfig {
    pub alpha: f64,
}

impl TrimConfig {
    pub fn new(alpha: f64) -> Self {
        TrimConfig { alpha }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::invalid("TrimConfig: alpha must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Number of untrimmed observations out of `n`.
    pub fn kept_count(&self, n: usize) -> usize {
        (n as f64 * (1.0 - self.alpha)).floor() as usize
    }
}

fn ones(p: usize) -> Vec<f64> {
    vec![1.0; p]
}

fn uniform_w(p: usize) -> Vec<f64> {
    vec![1.0 / (p as f64).sqrt(); p]
}

fn default_init(x: ArrayView2<f64>, k: usize) -> Result<Vec<usize>> {
    robin_init(x, k, &RobinParams::default())
}

fn centers_from_rows(x: ArrayView2<f64>, rows: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), x.ncols()), |(r, j)| x[[rows[r], j]])
}

/// Squared Euclidean distance of every observation to its assigned center.
fn raw_distances(x: ArrayView2<f64>, assignment: &[usize], centers: ArrayView2<f64>) -> Vec<f64> {
    (0..x.nrows())
        .map(|i| {
            let r = assignment[i];
            x.row(i)
                .iter()
                .zip(centers.row(r).iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum()
        })
        .collect()
}

/// Lloyd k-means from the given (default ROBIN) initial centers. Also
/// returns the total within-cluster sum of squares after every iteration.
pub fn kmeans_trace(
    x: ArrayView2<f64>,
    k: usize,
    init: Option<&[usize]>,
    max_iter: usize,
) -> Result<(ClusterModel, Vec<f64>)> {
    let n = x.nrows();
    let p = x.ncols();
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "kmeans: k must satisfy 1 <= k <= n (k={k}, n={n})"
        )));
    }
    let init: Vec<usize> = match init {
        Some(ix) => ix.to_vec(),
        None => default_init(x, k)?,
    };
    if init.len() != k {
        return Err(Error::invalid("kmeans: init must supply exactly k indices"));
    }

    let w = ones(p);
    let v = ones(n);
    let mut centers = centers_from_rows(x, &init);
    let mut assignment = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        let (a, _) = weighted_assign_with_distances(x, centers.view(), &w);
        let stable = a == assignment;
        assignment = a;
        centers = weighted_centers(x, &assignment, k, &v);
        trace.push(wcss_per_variable(x, &assignment, centers.view()).iter().sum());
        if stable {
            converged = true;
            break;
        }
    }

    let objective = *trace.last().expect("at least one iteration");
    let model = ClusterModel {
        method: "kmeans".into(),
        k,
        s: (p as f64).sqrt(),
        assignment: assignment.iter().map(|&r| r + 1).collect(),
        centers: (0..k).map(|r| centers.row(r).to_vec()).collect(),
        v: v.clone(),
        v1: v.clone(),
        v2: v,
        w: uniform_w(p),
        objective,
        converged,
        iterations,
        outlier_flags: vec![false; n],
        trim_alpha: None,
        seed: 0,
        diagnostics: Vec::new(),
    };
    Ok((model, trace))
}

pub fn kmeans(
    x: ArrayView2<f64>,
    k: usize,
    init: Option<&[usize]>,
    max_iter: usize,
) -> Result<ClusterModel> {
    kmeans_trace(x, k, init, max_iter).map(|(m, _)| m)
}

/// Trimmed k-means: each round keeps the `floor(n(1-alpha))` observations
/// closest to their centers and updates centers from those only. Trimmed
/// rows are reported as outliers with observation weight zero.
pub fn trimmed_kmeans(
    x: ArrayView2<f64>,
    k: usize,
    trim: TrimConfig,
    max_iter: usize,
) -> Result<ClusterModel> {
    trimmed_kmeans_from(x, k, trim, None, max_iter)
}

/// [`trimmed_kmeans`] from explicit initial center rows (default: ROBIN).
pub fn trimmed_kmeans_from(
    x: ArrayView2<f64>,
    k: usize,
    trim: TrimConfig,
    init: Option<&[usize]>,
    max_iter: usize,
) -> Result<ClusterModel> {
    trim.validate()?;
    let n = x.nrows();
    let p = x.ncols();
    let keep = trim.kept_count(n);
    if keep < k {
        return Err(Error::invalid(format!(
            "trimmed_kmeans: floor(n(1-alpha)) = {keep} must be >= k = {k}"
        )));
    }
    let init: Vec<usize> = match init {
        Some(ix) => ix.to_vec(),
        None => default_init(x, k)?,
    };
    if init.len() != k {
        return Err(Error::invalid("trimmed_kmeans: init must supply exactly k indices"));
    }
    let w = ones(p);
    let mut centers = centers_from_rows(x, &init);
    let mut assignment: Vec<usize> = Vec::new();
    let mut kept = vec![true; n];
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        let (a, dist) = weighted_assign_with_distances(x, centers.view(), &w);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| dist[i].partial_cmp(&dist[j]).unwrap().then(i.cmp(&j)));
        let mut new_kept = vec![false; n];
        for &i in order.iter().take(keep) {
            new_kept[i] = true;
        }
        let stable = a == assignment && new_kept == kept;
        assignment = a;
        kept = new_kept;
        centers = centers_over_kept(x, &assignment, k, &kept, centers.view());
        if stable {
            converged = true;
            break;
        }
    }

    let v: Vec<f64> = kept.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let kept_within: f64 = raw_distances(x, &assignment, centers.view())
        .iter()
        .zip(&kept)
        .filter(|(_, &b)| b)
        .map(|(&d, _)| d)
        .sum();
    Ok(ClusterModel {
        method: "tkc".into(),
        k,
        s: (p as f64).sqrt(),
        assignment: assignment.iter().map(|&r| r + 1).collect(),
        centers: (0..k).map(|r| centers.row(r).to_vec()).collect(),
        v: v.clone(),
        v1: v.clone(),
        v2: v,
        w: uniform_w(p),
        objective: kept_within,
        converged,
        iterations,
        outlier_flags: kept.iter().map(|&b| !b).collect(),
        trim_alpha: Some(trim.alpha),
        seed: 0,
        diagnostics: Vec::new(),
    })
}

/// Cluster means over the kept rows only; a cluster with no kept member
/// retains its previous center.
fn centers_over_kept(
    x: ArrayView2<f64>,
    assignment: &[usize],
    k: usize,
    kept: &[bool],
    previous: ArrayView2<f64>,
) -> Array2<f64> {
    let p = x.ncols();
    let mut centers = Array2::<f64>::zeros((k, p));
    let mut counts = vec![0usize; k];
    for i in 0..x.nrows() {
        if kept[i] {
            let r = assignment[i];
            counts[r] += 1;
            for j in 0..p {
                centers[[r, j]] += x[[i, j]];
            }
        }
    }
    for r in 0..k {
        if counts[r] > 0 {
            for j in 0..p {
                centers[[r, j]] /= counts[r] as f64;
            }
        } else {
            for j in 0..p {
                centers[[r, j]] = previous[[r, j]];
            }
        }
    }
    centers
}

/// Sparse k-means: alternate Lloyd rounds in the w-metric with the
/// constrained variable-weight update on the unweighted between-cluster SS.
pub fn sparse_kmeans(x: ArrayView2<f64>, k: usize, s: f64, max_iter: usize) -> Result<ClusterModel> {
    let n = x.nrows();
    let p = x.ncols();
    let sqrt_p = (p as f64).sqrt();
    if !(s > 1.0 && s <= sqrt_p + 1e-12) {
        return Err(Error::invalid(format!(
            "sparse_kmeans: s must lie in (1, sqrt(p)] (s={s})"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::invalid("sparse_kmeans: k out of range"));
    }

    let init = default_init(x, k)?;
    let v = ones(n);
    let mut w = uniform_w(p);
    let mut centers = centers_from_rows(x, &init);
    let mut assignment: Vec<usize> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut fallback = false;

    for _ in 0..OUTER_MAX {
        iterations += 1;
        let mut prev: Option<Vec<usize>> = None;
        for _ in 0..max_iter {
            let (a, _) = weighted_assign_with_distances(x, centers.view(), &w);
            let stable = prev.as_deref() == Some(&a[..]);
            prev = Some(a.clone());
            assignment = a;
            centers = weighted_centers(x, &assignment, k, &v);
            if stable {
                break;
            }
        }
        let b = weighted_bcss(x, &assignment, k, &v);
        let (w_new, fb) = update_variable_weights(&b, s);
        fallback |= fb;
        let denom: f64 = w.iter().sum();
        let change: f64 = w_new.iter().zip(&w).map(|(&a, &b)| (a - b).abs()).sum();
        w = w_new;
        if change / denom < W_TOL {
            converged = true;
            break;
        }
    }

    let (assignment, _) = weighted_assign_with_distances(x, centers.view(), &w);
    let centers = weighted_centers(x, &assignment, k, &v);
    let b = weighted_bcss(x, &assignment, k, &v);
    let objective: f64 = b.iter().zip(&w).map(|(&bj, &wj)| wj * bj).sum();
    let mut diagnostics = Vec::new();
    if fallback {
        diagnostics.push("uniform_w_fallback".into());
    }
    Ok(ClusterModel {
        method: "skc".into(),
        k,
        s,
        assignment: assignment.iter().map(|&r| r + 1).collect(),
        centers: (0..k).map(|r| centers.row(r).to_vec()).collect(),
        v: v.clone(),
        v1: v.clone(),
        v2: v,
        w,
        objective,
        converged,
        iterations,
        outlier_flags: vec![false; n],
        trim_alpha: None,
        seed: 0,
        diagnostics,
    })
}

/// Robust sparse k-means: sparse k-means where each round excludes both the
/// alpha-fraction of observations farthest from their centers in the
/// w-metric and the alpha-fraction farthest in the unweighted metric. The
/// union of the two trimmed sets is reported as outliers (v = 0).
pub fn robust_sparse_kmeans(
    x: ArrayView2<f64>,
    k: usize,
    s: f64,
    trim: TrimConfig,
    max_iter: usize,
) -> Result<ClusterModel> {
    trim.validate()?;
    let n = x.nrows();
    let p = x.ncols();
    let sqrt_p = (p as f64).sqrt();
    if !(s > 1.0 && s <= sqrt_p + 1e-12) {
        return Err(Error::invalid(format!(
            "robust_sparse_kmeans: s must lie in (1, sqrt(p)] (s={s})"
        )));
    }
    let keep = trim.kept_count(n);
    if keep < k {
        return Err(Error::invalid(format!(
            "robust_sparse_kmeans: floor(n(1-alpha)) = {keep} must be >= k = {k}"
        )));
    }
    let trim_count = n - keep;

    let init = default_init(x, k)?;
    let mut w = uniform_w(p);
    let mut centers = centers_from_rows(x, &init);
    let mut assignment: Vec<usize> = Vec::new();
    let mut kept = vec![true; n];
    let mut converged = false;
    let mut iterations = 0;
    let mut fallback = false;

    let trim_worst = |dist: &[f64], kept: &mut [bool]| {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| dist[j].partial_cmp(&dist[i]).unwrap().then(i.cmp(&j)));
        for &i in order.iter().take(trim_count) {
            kept[i] = false;
        }
    };

    for _ in 0..OUTER_MAX {
        iterations += 1;
        let mut prev: Option<(Vec<usize>, Vec<bool>)> = None;
        for _ in 0..max_iter {
            let (a, wdist) = weighted_assign_with_distances(x, centers.view(), &w);
            let rdist = raw_distances(x, &a, centers.view());
            let mut new_kept = vec![true; n];
            trim_worst(&wdist, &mut new_kept);
            trim_worst(&rdist, &mut new_kept);
            let state = (a, new_kept);
            let stable = prev.as_ref() == Some(&state);
            prev = Some(state.clone());
            assignment = state.0;
            kept = state.1;
            centers = centers_over_kept(x, &assignment, k, &kept, centers.view());
            if stable {
                break;
            }
        }
        let v: Vec<f64> = kept.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let b = weighted_bcss(x, &assignment, k, &v);
        let (w_new, fb) = update_variable_weights(&b, s);
        fallback |= fb;
        let denom: f64 = w.iter().sum();
        let change: f64 = w_new.iter().zip(&w).map(|(&a, &b)| (a - b).abs()).sum();
        w = w_new;
        if change / denom < W_TOL {
            converged = true;
            break;
        }
    }

    let v: Vec<f64> = kept.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let b = weighted_bcss(x, &assignment, k, &v);
    let objective: f64 = b.iter().zip(&w).map(|(&bj, &wj)| wj * bj).sum();
    let mut diagnostics = Vec::new();
    if fallback {
        diagnostics.push("uniform_w_fallback".into());
    }
    Ok(ClusterModel {
        method: "rskc".into(),
        k,
        s,
        assignment: assignment.iter().map(|&r| r + 1).collect(),
        centers: (0..k).map(|r| centers.row(r).to_vec()).collect(),
        v: v.clone(),
        v1: v.clone(),
        v2: v,
        w,
        objective,
        converged,
        iterations,
        outlier_flags: kept.iter().map(|&b| !b).collect(),
        trim_alpha: Some(trim.alpha),
        seed: 0,
        diagnostics,
    })
}
