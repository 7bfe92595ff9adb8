//! Core fitting machinery: robust weighted clustering with observation
//! weights (step 1), the lasso-constrained variable-weight update (step 2),
//! and the alternating outer loop with final outlier classification (step 3).

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::model::{ClusterModel, FitConfig};
use crate::outlier::{biweight, lof, standardize_lof, LofParams};
use crate::robin::robin_init;

/// Assign every observation to the center minimizing the w-weighted squared
/// distance, ties going to the smaller cluster index. Also returns that
/// minimal distance per observation. Empty clusters are repaired by
/// reseeding them with the observation farthest from its own center.
pub fn weighted_assign_with_distances(
    x: ArrayView2<f64>,
    centers: ArrayView2<f64>,
    w: &[f64],
) -> (Vec<usize>, Vec<f64>) {
    let n = x.nrows();
    let p = x.ncols();
    let k = centers.nrows();
    debug_assert_eq!(centers.ncols(), p);
    debug_assert_eq!(w.len(), p);

    // d2(i, r) = sum_j w_j x_ij^2 + sum_j w_j m_rj^2 - 2 sum_j x_ij (w_j m_rj)
    let cw = Array2::from_shape_fn((k, p), |(r, j)| w[j] * centers[[r, j]]);
    let cross = x.dot(&cw.t());
    let cn: Vec<f64> = (0..k)
        .map(|r| (0..p).map(|j| w[j] * centers[[r, j]] * centers[[r, j]]).sum())
        .collect();
    let rn: Vec<f64> = (0..n)
        .map(|i| x.row(i).iter().zip(w).map(|(&v, &wj)| wj * v * v).sum())
        .collect();

    let mut assignment = vec![0usize; n];
    let mut dist = vec![0.0f64; n];
    for i in 0..n {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for r in 0..k {
            let d = (rn[i] + cn[r] - 2.0 * cross[[i, r]]).max(0.0);
            if d < best_d {
                best_d = d;
                best = r;
            }
        }
        assignment[i] = best;
        dist[i] = best_d;
    }

    // reseed empty clusters with the farthest observation from its center
    let mut sizes = vec![0usize; k];
    for &a in &assignment {
        sizes[a] += 1;
    }
    for r in 0..k {
        while sizes[r] == 0 {
            let far = (0..n)
                .filter(|&i| sizes[assignment[i]] > 1)
                .max_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap())
                .expect("no donor observation for empty-cluster repair");
            sizes[assignment[far]] -= 1;
            assignment[far] = r;
            sizes[r] += 1;
            dist[far] = 0.0;
        }
    }
    (assignment, dist)
}

/// `weighted_assign_with_distances` without the distances.
pub fn weighted_assign(x: ArrayView2<f64>, centers: ArrayView2<f64>, w: &[f64]) -> Vec<usize> {
    weighted_assign_with_distances(x, centers, w).0
}

/// Per-cluster, per-variable v-weighted means. A cluster whose weights sum
/// to zero falls back to its unweighted mean.
pub fn weighted_centers(
    x: ArrayView2<f64>,
    assignment: &[usize],
    k: usize,
    v: &[f64],
) -> Array2<f64> {
    let n = x.nrows();
    let p = x.ncols();
    let mut centers = Array2::<f64>::zeros((k, p));
    let mut wsum = vec![0.0f64; k];
    let mut count = vec![0usize; k];
    for i in 0..n {
        let r = assignment[i];
        wsum[r] += v[i];
        count[r] += 1;
        for j in 0..p {
            centers[[r, j]] += v[i] * x[[i, j]];
        }
    }
    for r in 0..k {
        if wsum[r] > 0.0 {
            for j in 0..p {
                centers[[r, j]] /= wsum[r];
            }
        } else {
            // all-outlier cluster: unweighted mean keeps the center defined
            for j in 0..p {
                centers[[r, j]] = 0.0;
            }
            for i in 0..n {
                if assignment[i] == r {
                    for j in 0..p {
                        centers[[r, j]] += x[[i, j]];
                    }
                }
            }
            for j in 0..p {
                centers[[r, j]] /= count[r].max(1) as f64;
            }
        }
    }
    centers
}

/// Per-variable v-weighted between-cluster sum of squares: weighted total SS
/// about the weighted grand mean minus weighted within-cluster SS about the
/// weighted cluster means, clamped at zero.
pub fn weighted_bcss(x: ArrayView2<f64>, assignment: &[usize], k: usize, v: &[f64]) -> Vec<f64> {
    let n = x.nrows();
    let p = x.ncols();
    let sv: f64 = v.iter().sum();

    let mut grand = vec![0.0f64; p];
    if sv > 0.0 {
        for i in 0..n {
            for j in 0..p {
                grand[j] += v[i] * x[[i, j]];
            }
        }
        for g in grand.iter_mut() {
            *g /= sv;
        }
    } else {
        for i in 0..n {
            for j in 0..p {
                grand[j] += x[[i, j]];
            }
        }
        for g in grand.iter_mut() {
            *g /= n as f64;
        }
    }

    let centers = weighted_centers(x, assignment, k, v);
    let mut b = vec![0.0f64; p];
    for i in 0..n {
        let r = assignment[i];
        for j in 0..p {
            let dt = x[[i, j]] - grand[j];
            let dw = x[[i, j]] - centers[[r, j]];
            b[j] += v[i] * (dt * dt - dw * dw);
        }
    }
    for bj in b.iter_mut() {
        if *bj < 0.0 {
            *bj = 0.0;
        }
    }
    b
}

/// Plain per-variable within-cluster sum of squares about the given centers.
pub fn wcss_per_variable(
    x: ArrayView2<f64>,
    assignment: &[usize],
    centers: ArrayView2<f64>,
) -> Vec<f64> {
    let p = x.ncols();
    let mut w = vec![0.0f64; p];
    for i in 0..x.nrows() {
        let r = assignment[i];
        for j in 0..p {
            let d = x[[i, j]] - centers[[r, j]];
            w[j] += d * d;
        }
    }
    w
}

/// Observation weights of one fitting round.
#[derive(Debug, Clone)]
pub struct ObservationWeights {
    /// From the pass on w-scaled data (variables with w_j > 0 only).
    pub v1: Vec<f64>,
    /// From the pass on raw data (all variables).
    pub v2: Vec<f64>,
    /// Elementwise minimum of the two passes.
    pub v: Vec<f64>,
    /// True when any cluster hit the degenerate biweight step mode.
    pub step_mode: bool,
}

fn members_by_cluster(assignment: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut m = vec![Vec::new(); k];
    for (i, &r) in assignment.iter().enumerate() {
        m[r].push(i);
    }
    m
}

fn gather_rows(x: ArrayView2<f64>, rows: &[usize], cols: Option<&[usize]>, w: Option<&[f64]>) -> Array2<f64> {
    match cols {
        Some(cols) => Array2::from_shape_fn((rows.len(), cols.len()), |(a, b)| {
            let j = cols[b];
            let scale = w.map_or(1.0, |w| w[j]);
            scale * x[[rows[a], j]]
        }),
        None => Array2::from_shape_fn((rows.len(), x.ncols()), |(a, j)| {
            let scale = w.map_or(1.0, |w| w[j]);
            scale * x[[rows[a], j]]
        }),
    }
}

/// LOF -> standardize -> biweight over one member set of rows.
fn cluster_weights(y: &Array2<f64>, params: &LofParams) -> Result<(Vec<f64>, bool)> {
    let m = y.nrows();
    if m == 1 {
        return Ok((vec![1.0], false));
    }
    let q = params.q.min(m - 1);
    let scores = lof(y.view(), q, params)?;
    let all: Vec<usize> = (0..m).collect();
    let star = standardize_lof(&scores, &all)?;
    Ok(biweight(&star, params.c, params.scaled_mad))
}

/// Both weighting passes for every cluster: v1 on the w-scaled data, v2 on
/// the raw data, combined as the elementwise minimum.
pub fn compute_observation_weights(
    x: ArrayView2<f64>,
    w: &[f64],
    assignment: &[usize],
    k: usize,
    params: &LofParams,
) -> Result<ObservationWeights> {
    let n = x.nrows();
    let active: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
    let mut v1 = vec![1.0f64; n];
    let mut v2 = vec![1.0f64; n];
    let mut step_mode = false;

    for members in members_by_cluster(assignment, k) {
        if members.is_empty() {
            continue;
        }
        if members.len() == 1 {
            continue; // singleton keeps weight 1 in both passes
        }
        let scaled = gather_rows(x, &members, Some(&active), Some(w));
        let (wv1, f1) = if active.is_empty() {
            (vec![1.0; members.len()], false)
        } else {
            cluster_weights(&scaled, params)?
        };
        let raw = gather_rows(x, &members, None, None);
        let (wv2, f2) = cluster_weights(&raw, params)?;
        step_mode |= f1 | f2;
        for (pos, &i) in members.iter().enumerate() {
            v1[i] = wv1[pos];
            v2[i] = wv2[pos];
        }
    }
    let v: Vec<f64> = v1.iter().zip(&v2).map(|(&a, &b)| a.min(b)).collect();
    Ok(ObservationWeights { v1, v2, v, step_mode })
}

/// State reached by step 1 for a fixed variable-weight vector.
#[derive(Debug, Clone)]
pub struct Step1State {
    pub assignment: Vec<usize>,
    pub centers: Array2<f64>,
    pub weights: ObservationWeights,
    /// Achieved value of the w-weighted, v1-adjusted between-cluster SS.
    pub objective: f64,
}

/// Step 1: ROBIN initialization on the w-scaled data, then alternating
/// rounds of assignment, observation weighting, and v1-weighted center
/// updates. Returns the round that maximized the objective.
pub fn step1(x: ArrayView2<f64>, w: &[f64], config: &FitConfig) -> Result<Step1State> {
    let k = config.k;
    let active: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
    let init = if active.is_empty() {
        // no informative direction: seed from raw data
        let all: Vec<usize> = (0..w.len()).collect();
        let xw = gather_rows(x, &(0..x.nrows()).collect::<Vec<_>>(), Some(&all), None);
        robin_init(xw.view(), k, &config.robin_params)?
    } else {
        let rows: Vec<usize> = (0..x.nrows()).collect();
        let xw = gather_rows(x, &rows, Some(&active), Some(w));
        robin_init(xw.view(), k, &config.robin_params)?
    };

    let mut centers = Array2::from_shape_fn((k, x.ncols()), |(r, j)| x[[init[r], j]]);
    let mut best: Option<Step1State> = None;
    let mut prev_assignment: Option<Vec<usize>> = None;

    for _ in 0..config.lloyd_max_iter {
        let assignment = weighted_assign(x, centers.view(), w);
        let weights = compute_observation_weights(x, w, &assignment, k, &config.lof_params)?;
        centers = weighted_centers(x, &assignment, k, &weights.v1);
        let b1 = weighted_bcss(x, &assignment, k, &weights.v1);
        let objective: f64 = b1.iter().zip(w).map(|(&bj, &wj)| wj * bj).sum();

        let better = best.as_ref().map_or(true, |s| objective > s.objective);
        if better {
            best = Some(Step1State {
                assignment: assignment.clone(),
                centers: centers.clone(),
                weights: weights.clone(),
                objective,
            });
        }
        if prev_assignment.as_deref() == Some(&assignment[..]) {
            break; // fixed point
        }
        prev_assignment = Some(assignment);
    }
    Ok(best.expect("at least one step-1 round"))
}

/// Elementwise soft threshold `sign(a) * max(|a| - delta, 0)`.
pub fn soft_threshold(a: &[f64], delta: f64) -> Vec<f64> {
    a.iter()
        .map(|&v| v.signum() * (v.abs() - delta).max(0.0))
        .collect()
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Maximize `sum_j w_j b_j` over `w >= 0`, `||w||_2 <= 1`, `||w||_1 <= s`:
/// soft threshold and normalize, with the threshold found by bisection when
/// the l1 bound is active. Returns the weights and whether the all-zero
/// fallback to the uniform vector fired.
pub fn update_variable_weights(b: &[f64], s: f64) -> (Vec<f64>, bool) {
    let p = b.len();
    debug_assert!(b.iter().all(|&x| x >= 0.0), "negative BCSS must be clamped upstream");
    let max_b = b.iter().cloned().fold(0.0f64, f64::max);
    if max_b <= 0.0 {
        return (vec![1.0 / (p as f64).sqrt(); p], true);
    }

    let normalized = |delta: f64| -> Vec<f64> {
        let st = soft_threshold(b, delta);
        let norm = l2(&st);
        if norm > 0.0 {
            st.iter().map(|&v| v / norm).collect()
        } else {
            Vec::new()
        }
    };

    let w0 = normalized(0.0);
    if l1(&w0) <= s {
        return (w0, false);
    }

    let mut lo = 0.0f64;
    let mut hi = max_b;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let w = normalized(mid);
        if w.is_empty() {
            hi = mid;
            continue;
        }
        let n1 = l1(&w);
        if (n1 - s).abs() <= 1e-8 {
            return (w, false);
        }
        if n1 > s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // tie-degenerate stall: the l1 norm is unresponsive to the threshold;
    // rescaling onto the l1 boundary is feasible and optimal for the linear
    // objective
    let mut w = normalized(lo);
    if w.is_empty() {
        w = normalized(0.0);
    }
    let n1 = l1(&w);
    if n1 > s {
        for wi in w.iter_mut() {
            *wi *= s / n1;
        }
    }
    (w, false)
}

/// Flag observations whose combined weight falls below the cutoff.
pub fn classify_outliers(v: &[f64], cutoff: f64) -> Vec<bool> {
    v.iter().map(|&vi| vi < cutoff).collect()
}

fn all_rows_identical(x: ArrayView2<f64>) -> bool {
    let first = x.row(0);
    (1..x.nrows()).all(|i| x.row(i) == first)
}

/// Full three-step fit: alternate step 1 and the variable-weight update
/// until the weights stabilize, then assign, weight, and classify outliers.
pub fn fit(x: ArrayView2<f64>, config: &FitConfig) -> Result<ClusterModel> {
    let n = x.nrows();
    let p = x.ncols();
    config.validate(p)?;
    if n <= config.k {
        return Err(Error::invalid(format!(
            "fit: need more observations than clusters (n={n}, k={})",
            config.k
        )));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("fit: data contains non-finite values"));
    }
    if all_rows_identical(x) {
        return Err(Error::degenerate("all observations are identical"));
    }

    let k = config.k;
    let mut diagnostics: Vec<String> = Vec::new();
    let mut w = vec![1.0 / (p as f64).sqrt(); p];
    let mut state: Option<Step1State> = None;
    let mut converged = false;
    let mut iterations = 0;
    let mut step_mode = false;
    let mut uniform_fallback = false;

    for _ in 0..config.outer_max_iter {
        iterations += 1;
        let st = step1(x, &w, config)?;
        step_mode |= st.weights.step_mode;
        let b = weighted_bcss(x, &st.assignment, k, &st.weights.v);
        let (w_new, fallback) = update_variable_weights(&b, config.s);
        uniform_fallback |= fallback;
        state = Some(st);

        let denom = l1(&w);
        let change: f64 = w_new.iter().zip(&w).map(|(&a, &b)| (a - b).abs()).sum();
        w = w_new;
        if change / denom < config.w_tol {
            converged = true;
            break;
        }
    }
    let st = state.expect("outer loop ran at least once");

    // step 3: final assignment in the final w-metric, fresh observation
    // weights, and outlier classification
    let assignment = weighted_assign(x, st.centers.view(), &w);
    let weights = compute_observation_weights(x, &w, &assignment, k, &config.lof_params)?;
    step_mode |= weights.step_mode;
    let centers = weighted_centers(x, &assignment, k, &weights.v1);
    let b = weighted_bcss(x, &assignment, k, &weights.v);
    let objective: f64 = b.iter().zip(&w).map(|(&bj, &wj)| wj * bj).sum();
    let outlier_flags = classify_outliers(&weights.v, config.outlier_cutoff);

    if step_mode {
        diagnostics.push("biweight_step_mode".into());
    }
    if uniform_fallback {
        diagnostics.push("uniform_w_fallback".into());
    }

    Ok(ClusterModel {
        method: "wrsk".into(),
        k,
        s: config.s,
        assignment: assignment.iter().map(|&r| r + 1).collect(),
        centers: (0..k).map(|r| centers.row(r).to_vec()).collect(),
        v: weights.v,
        v1: weights.v1,
        v2: weights.v2,
        w,
        objective,
        converged,
        iterations,
        outlier_flags,
        trim_alpha: None,
        seed: config.seed,
        diagnostics,
    })
}
