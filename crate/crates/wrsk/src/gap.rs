//! Permutation-based gap statistics: the classic per-variable gap for plain
//! k-means, and the observation-weight-adjusted gap over a (k, s) grid with
//! both selection rules.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::kmeans;
use crate::error::{Error, Result};
use crate::fit::{fit, wcss_per_variable};
use crate::model::FitConfig;
use crate::rng::{stream, tag_f64};
use crate::stats::{mean, sample_sd};

const TAG_PERMUTE: u64 = 0x70_65_72_6d; // "perm"
const TAG_FIT: u64 = 0x66_69_74; // "fit"
const TAG_CLASSIC: u64 = 0x67_6b; // "gk"

/// Floor applied before taking logs of an objective, with a diagnostic flag.
const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GapParams {
    /// Number of permuted datasets per grid cell.
    pub permutations: usize,
    /// Multiply the permutation sd by sqrt(1 + 1/A).
    pub se_inflation: bool,
}

impl Default for GapParams {
    fn default() -> Self {
        GapParams {
            permutations: 10,
            se_inflation: true,
        }
    }
}

impl GapParams {
    fn validate(&self) -> Result<()> {
        if self.permutations < 2 {
            return Err(Error::invalid("GapParams: need at least 2 permutations"));
        }
        Ok(())
    }

    fn se(&self, perm_logs: &[f64]) -> f64 {
        let sd = sample_sd(perm_logs);
        if self.se_inflation {
            sd * (1.0 + 1.0 / perm_logs.len() as f64).sqrt()
        } else {
            sd
        }
    }
}

/// One cell of the (k, s) gap grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapEntry {
    pub k: usize,
    pub s: f64,
    pub gap: f64,
    pub se: f64,
    pub observed_log: f64,
    pub mean_perm_log: f64,
    pub flags: Vec<String>,
}

/// Gap values over a (k, s) grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapTable {
    pub k_grid: Vec<usize>,
    pub s_grid: Vec<f64>,
    pub permutations: usize,
    /// Entries in row-major (k, then s) grid order.
    pub entries: Vec<GapEntry>,
}

impl GapTable {
    pub fn entry(&self, k: usize, s: f64) -> Option<&GapEntry> {
        self.entries.iter().find(|e| e.k == k && e.s == s)
    }

    pub fn entries_for_k(&self, k: usize) -> Vec<&GapEntry> {
        self.entries.iter().filter(|e| e.k == k).collect()
    }

    /// Plot-ready CSV: `k,s,gap,se,observed_log,mean_perm_log,flags`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,s,gap,se,observed_log,mean_perm_log,flags\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.k,
                e.s,
                e.gap,
                e.se,
                e.observed_log,
                e.mean_perm_log,
                e.flags.join(";")
            ));
        }
        out
    }
}

/// Independently permute the rows within every column.
pub fn permute_columns(x: ArrayView2<f64>, rng: &mut impl Rng) -> Array2<f64> {
    let n = x.nrows();
    let mut out = Array2::<f64>::zeros((n, x.ncols()));
    for j in 0..x.ncols() {
        let mut col: Vec<f64> = x.column(j).to_vec();
        col.shuffle(rng);
        for i in 0..n {
            out[[i, j]] = col[i];
        }
    }
    out
}

fn floored_log(objective: f64, flags: &mut Vec<String>, what: &str) -> f64 {
    if objective < LOG_FLOOR {
        flags.push(format!("{what}_floored"));
        LOG_FLOOR.ln()
    } else {
        objective.ln()
    }
}

/// The observation-weight-adjusted gap statistic for one (k, s) cell: the
/// log objective of a full fit on `x` minus the mean log objective over
/// fits on column-permuted copies.
pub fn gap_wrsk(
    x: ArrayView2<f64>,
    k: usize,
    s: f64,
    params: &GapParams,
    base: &FitConfig,
) -> Result<GapEntry> {
    params.validate()?;
    let mut flags = Vec::new();

    let mut cfg = base.clone();
    cfg.k = k;
    cfg.s = s;
    cfg.seed = crate::rng::derive_seed(base.seed, &[TAG_FIT, k as u64, tag_f64(s)]);
    let observed = fit(x, &cfg)?;
    if observed.diagnostics.iter().any(|d| d == "uniform_w_fallback") {
        flags.push("observed_uniform_w_fallback".into());
    }
    let observed_log = floored_log(observed.objective, &mut flags, "observed");

    let mut perm_logs = Vec::with_capacity(params.permutations);
    for a in 0..params.permutations {
        let mut rng = stream(base.seed, &[TAG_PERMUTE, k as u64, tag_f64(s), a as u64]);
        let xa = permute_columns(x, &mut rng);
        let mut cfg_a = cfg.clone();
        cfg_a.seed = crate::rng::derive_seed(base.seed, &[TAG_FIT, k as u64, tag_f64(s), a as u64]);
        let m = fit(xa.view(), &cfg_a)?;
        perm_logs.push(floored_log(m.objective, &mut flags, "permuted"));
    }

    let mean_perm_log = mean(&perm_logs);
    Ok(GapEntry {
        k,
        s,
        gap: observed_log - mean_perm_log,
        se: params.se(&perm_logs),
        observed_log,
        mean_perm_log,
        flags,
    })
}

/// Evaluate the gap statistic over the full (k, s) grid. Cells are
/// independent and run in parallel; every cell derives its own RNG streams,
/// so the result does not depend on the number of worker threads.
pub fn gap_table(
    x: ArrayView2<f64>,
    k_grid: &[usize],
    s_grid: &[f64],
    params: &GapParams,
    base: &FitConfig,
) -> Result<GapTable> {
    params.validate()?;
    if k_grid.is_empty() || s_grid.is_empty() {
        return Err(Error::invalid("gap_table: empty grid"));
    }
    let cells: Vec<(usize, f64)> = k_grid
        .iter()
        .flat_map(|&k| s_grid.iter().map(move |&s| (k, s)))
        .collect();
    let entries: Result<Vec<GapEntry>> = cells
        .par_iter()
        .map(|&(k, s)| gap_wrsk(x, k, s, params, base))
        .collect();
    Ok(GapTable {
        k_grid: k_grid.to_vec(),
        s_grid: s_grid.to_vec(),
        permutations: params.permutations,
        entries: entries?,
    })
}

/// One-standard-error rule toward sparsity: the smallest `s` whose gap is
/// within one standard error of the largest gap (se taken at the argmax).
/// Entries must belong to a single `k` and be sorted by ascending `s`.
pub fn select_s<'a>(entries: &[&'a GapEntry]) -> &'a GapEntry {
    assert!(!entries.is_empty(), "select_s: empty entry list");
    let best = entries
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.gap.partial_cmp(&b.gap).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let threshold = entries[best].gap - entries[best].se;
    entries
        .iter()
        .find(|e| e.gap >= threshold)
        .copied()
        .unwrap_or(entries[best])
}

/// Joint selection: optimize `s` per `k` with the one-standard-error rule,
/// then take the `k` with the largest gap at its optimal `s`. Ties break
/// toward smaller `k`.
pub fn select_k<'a>(table: &'a GapTable) -> &'a GapEntry {
    assert!(!table.entries.is_empty(), "select_k: empty table");
    let mut best: Option<&GapEntry> = None;
    for &k in &table.k_grid {
        let rows = table.entries_for_k(k);
        if rows.is_empty() {
            continue;
        }
        let cand = select_s(&rows);
        let better = match best {
            None => true,
            Some(b) => cand.gap > b.gap,
        };
        if better {
            best = Some(cand);
        }
    }
    best.expect("grid has at least one k")
}

/// Classic gap for plain k-means over a contiguous ascending k grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapKEntry {
    pub k: usize,
    pub gap: f64,
    pub se: f64,
    pub observed_log_sum: f64,
    pub mean_perm_log_sum: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapKResult {
    pub k_star: usize,
    pub entries: Vec<GapKEntry>,
    /// True when no k satisfied the stopping rule and the largest k in the
    /// grid was returned.
    pub fallback: bool,
}

/// Per-variable sum of log within-cluster SS, weighted by `w`.
fn log_wcss_sum(x: ArrayView2<f64>, k: usize, w: &[f64], flags: &mut Vec<String>) -> Result<f64> {
    let model = kmeans(x, k, None, 100)?;
    let assignment: Vec<usize> = model.assignment.iter().map(|&a| a - 1).collect();
    let centers = Array2::from_shape_fn((k, x.ncols()), |(r, j)| model.centers[r][j]);
    let per_var = wcss_per_variable(x, &assignment, centers.view());
    Ok(per_var
        .iter()
        .zip(w)
        .map(|(&wj, &weight)| weight * floored_log(wj, flags, "wcss"))
        .sum())
}

/// Classic gap-statistic selection of `k` for baseline k-means with ROBIN
/// initialization: `Gap_k = mean_a sum_j w_j log(W_j^{(a)}) - sum_j w_j
/// log(W_j)`, choosing the smallest `k` with
/// `Gap_k >= Gap_{k+1} - se_{k+1}`.
pub fn gap_k_classic(
    x: ArrayView2<f64>,
    k_grid: &[usize],
    params: &GapParams,
    w_fixed: Option<&[f64]>,
    seed: u64,
) -> Result<GapKResult> {
    params.validate()?;
    if k_grid.is_empty() {
        return Err(Error::invalid("gap_k_classic: empty k grid"));
    }
    if k_grid.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::invalid("gap_k_classic: k grid must be contiguous ascending"));
    }
    let w_all = vec![1.0; x.ncols()];
    let w = w_fixed.unwrap_or(&w_all);

    let entries: Result<Vec<GapKEntry>> = k_grid
        .par_iter()
        .map(|&k| {
            let mut flags = Vec::new();
            let observed = log_wcss_sum(x, k, w, &mut flags)?;
            let mut perm_logs = Vec::with_capacity(params.permutations);
            for a in 0..params.permutations {
                let mut rng = stream(seed, &[TAG_CLASSIC, k as u64, a as u64]);
                let xa = permute_columns(x, &mut rng);
                perm_logs.push(log_wcss_sum(xa.view(), k, w, &mut flags)?);
            }
            Ok(GapKEntry {
                k,
                gap: mean(&perm_logs) - observed,
                se: params.se(&perm_logs),
                observed_log_sum: observed,
                mean_perm_log_sum: mean(&perm_logs),
            })
        })
        .collect();
    let entries = entries?;

    for i in 0..entries.len().saturating_sub(1) {
        if entries[i].gap >= entries[i + 1].gap - entries[i + 1].se {
            return Ok(GapKResult {
                k_star: entries[i].k,
                entries,
                fallback: false,
            });
        }
    }
    Ok(GapKResult {
        k_star: *k_grid.last().unwrap(),
        entries,
        fallback: true,
    })
}

/// The default sparsity grid: 1.1 upward in steps of 0.5, capped at sqrt(p).
pub fn default_s_grid(p: usize) -> Vec<f64> {
    let sqrt_p = (p as f64).sqrt();
    let mut grid = Vec::new();
    let mut s = 1.1;
    while s <= sqrt_p + 1e-12 {
        grid.push(s);
        s += 0.5;
    }
    if grid.is_empty() {
        grid.push(sqrt_p);
    }
    grid
}
