//! Synthetic benchmark generator: Gaussian groups with sparse structured
//! means and rotated equicorrelation covariances, standard-normal noise
//! variables, and two disjoint contamination mechanisms (scattered or
//! uniform outliers in the informative block, uniform outliers in a subset
//! of the noise variables).

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::DataMatrix;

const TAG_SIZES: u64 = 1;
const TAG_MEANS: u64 = 2;
const TAG_COV: u64 = 3;
const TAG_SAMPLES: u64 = 4;
const TAG_NOISE: u64 = 5;
const TAG_CONTAM: u64 = 6;
const TAG_CONTAM_INF: u64 = 7;
const TAG_CONTAM_NOISE_ROWS: u64 = 8;
const TAG_CONTAM_NOISE_VARS: u64 = 9;
const TAG_CONTAM_NOISE_VALUES: u64 = 10;

/// Magnitude interval of the uniform outlier mechanism.
const UNIFORM_OUTLIER: (f64, f64) = (6.0, 12.0);

/// Group sizes: either given explicitly (one per group) or sampled
/// uniformly from an inclusive range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSizes {
    Fixed(Vec<usize>),
    Range { min: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierKind {
    Scattered,
    Uniform,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of groups.
    pub g: usize,
    pub group_sizes: GroupSizes,
    /// Informative dimensions (carry the group separation).
    pub p_inf: usize,
    /// Noise dimensions (standard normal, no separation).
    pub p_noise: usize,
    /// Magnitude interval for nonzero mean entries; signs are random.
    #[serde(default = "default_mu_range")]
    pub mu_range: (f64, f64),
    /// Equicorrelation interval, one draw per group.
    #[serde(default = "default_rho_range")]
    pub rho_range: (f64, f64),
    /// Variance multiplier interval for scattered outliers.
    #[serde(default = "default_sigma_range")]
    pub sigma_range: (f64, f64),
    /// Fraction of each group replaced by outliers in the informative block.
    #[serde(default)]
    pub outlier_frac_inf: f64,
    /// Fraction of each group contaminated in the noise block.
    #[serde(default)]
    pub outlier_frac_noise: f64,
    /// Fraction of noise variables receiving the noise contamination.
    #[serde(default)]
    pub noise_contam_var_frac: f64,
    #[serde(default = "default_outlier_kind")]
    pub outlier_kind_inf: OutlierKind,
    /// Draw uniform outliers literally from U[-12,6] u U[6,12] instead of
    /// the symmetric +/- U[6,12] reading.
    #[serde(default)]
    pub uniform_literal_interval: bool,
    pub seed: u64,
}

fn default_mu_range() -> (f64, f64) {
    (3.0, 6.0)
}
fn default_rho_range() -> (f64, f64) {
    (0.1, 0.9)
}
fn default_sigma_range() -> (f64, f64) {
    (3.0, 10.0)
}
fn default_outlier_kind() -> OutlierKind {
    OutlierKind::Scattered
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.g < 1 {
            return Err(Error::invalid("SimConfig: g must be >= 1"));
        }
        if self.g > 1 && self.p_inf < 1 {
            return Err(Error::invalid("SimConfig: p_inf must be >= 1 for g > 1"));
        }
        for (name, f) in [
            ("outlier_frac_inf", self.outlier_frac_inf),
            ("outlier_frac_noise", self.outlier_frac_noise),
            ("noise_contam_var_frac", self.noise_contam_var_frac),
        ] {
            if !(0.0..1.0).contains(&f) {
                return Err(Error::invalid(format!("SimConfig: {name} must lie in [0, 1)")));
            }
        }
        if let GroupSizes::Fixed(sizes) = &self.group_sizes {
            if sizes.len() != self.g {
                return Err(Error::invalid("SimConfig: group_sizes must list one size per group"));
            }
            if sizes.iter().any(|&s| s == 0) {
                return Err(Error::invalid("SimConfig: group sizes must be positive"));
            }
        }
        if let GroupSizes::Range { min, max } = self.group_sizes {
            if min == 0 || max < min {
                return Err(Error::invalid("SimConfig: invalid size range"));
            }
        }
        let (lo, hi) = self.rho_range;
        if !(0.1..=0.9).contains(&lo) || !(0.1..=0.9).contains(&hi) || hi < lo {
            return Err(Error::invalid("SimConfig: rho_range must lie within [0.1, 0.9]"));
        }
        Ok(())
    }
}

/// A generated dataset with its ground truth.
#[derive(Debug, Clone)]
pub struct SimDataset {
    pub x: DataMatrix,
    /// Pre-contamination group label per row (1-based).
    pub labels: Vec<usize>,
    /// Rows replaced in the informative variables.
    pub outlier_inf_flags: Vec<bool>,
    /// Rows contaminated in the noise variables (disjoint from the above).
    pub outlier_noise_flags: Vec<bool>,
    /// Column indices of the informative block (always the leading block).
    pub informative_indices: Vec<usize>,
    pub config: SimConfig,
    pub diagnostics: Vec<String>,
}

impl SimDataset {
    /// Union of both contamination mechanisms.
    pub fn outlier_flags(&self) -> Vec<bool> {
        self.outlier_inf_flags
            .iter()
            .zip(&self.outlier_noise_flags)
            .map(|(&a, &b)| a || b)
            .collect()
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn noise_indices(&self) -> Vec<usize> {
        (self.config.p_inf..self.p()).collect()
    }
}

/// Group mean vectors: group `t` (1-based) has nonzero entries at positions
/// t, t+g, t+2g, ... (1-based) up to `p_inf`, each an independent magnitude
/// draw with a random sign.
pub fn group_means(
    g: usize,
    p_inf: usize,
    mu_range: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let mut means = Vec::with_capacity(g);
    for t in 0..g {
        let mut mu = vec![0.0; p_inf];
        let mut pos = t;
        while pos < p_inf {
            let magnitude = rng.gen_range(mu_range.0..=mu_range.1);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            mu[pos] = sign * magnitude;
            pos += g;
        }
        means.push(mu);
    }
    means
}

/// A Haar-distributed random rotation: orthonormalize a standard Gaussian
/// matrix (the positive diagonal of the triangular factor makes the
/// distribution uniform over rotations).
pub fn haar_rotation(p: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    loop {
        let a = Array2::from_shape_fn((p, p), |_| {
            let z: f64 = StandardNormal.sample(rng);
            z
        });
        if let Some(q) = gram_schmidt(&a) {
            return q;
        }
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Returns `None`
/// on (vanishingly unlikely) numerical rank deficiency.
fn gram_schmidt(a: &Array2<f64>) -> Option<Array2<f64>> {
    let p = a.nrows();
    let mut q = a.clone();
    for j in 0..p {
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i).to_owned();
                let proj = qi.dot(&q.column(j));
                for r in 0..p {
                    q[[r, j]] -= proj * qi[r];
                }
            }
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        if norm < 1e-10 {
            return None;
        }
        for r in 0..p {
            q[[r, j]] /= norm;
        }
    }
    Some(q)
}

/// Rotated equicorrelation covariance `Q E(rho) Q^T` where `E(rho)` has unit
/// diagonal and constant off-diagonal `rho`.
pub fn group_covariance(p_inf: usize, rho: f64, rng: &mut ChaCha8Rng) -> Result<Array2<f64>> {
    if !(0.1..=0.9).contains(&rho) {
        return Err(Error::invalid(format!(
            "group_covariance: rho must lie in [0.1, 0.9] (rho={rho})"
        )));
    }
    let q = haar_rotation(p_inf, rng);
    // Q E Q^T = (1-rho) I + rho u u^T with u = Q 1
    let u = rotated_ones(&q);
    let mut sigma = Array2::from_shape_fn((p_inf, p_inf), |(i, j)| rho * u[i] * u[j]);
    for i in 0..p_inf {
        sigma[[i, i]] += 1.0 - rho;
    }
    Ok(sigma)
}

fn rotated_ones(q: &Array2<f64>) -> Array1<f64> {
    let p = q.nrows();
    Array1::from_shape_fn(p, |i| (0..p).map(|j| q[[i, j]]).sum())
}

/// Symmetric square-root factor of the rotated equicorrelation matrix:
/// `sqrt(Sigma) = s I + t u u^T` with `s = sqrt(1-rho)` and `t` solving
/// `p t^2 + 2 s t = rho`.
struct CovFactor {
    s: f64,
    t: f64,
    u: Array1<f64>,
}

impl CovFactor {
    fn new(p: usize, rho: f64, q: &Array2<f64>) -> Self {
        let s = (1.0 - rho).sqrt();
        let pf = p as f64;
        let t = ((1.0 - rho + pf * rho).sqrt() - s) / pf;
        CovFactor {
            s,
            t,
            u: rotated_ones(q),
        }
    }

    /// `mu + sqrt(Sigma) z` for a standard normal draw `z`.
    fn sample(&self, mu: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let p = mu.len();
        let z: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
        let uz: f64 = self.u.iter().zip(&z).map(|(&a, &b)| a * b).sum();
        (0..p)
            .map(|j| mu[j] + self.s * z[j] + self.t * self.u[j] * uz)
            .collect()
    }
}

fn draw_uniform_outlier(rng: &mut ChaCha8Rng, literal: bool) -> f64 {
    let (lo, hi) = UNIFORM_OUTLIER;
    if literal {
        // uniform over [-12, 6] u [6, 12] by length (18 : 6)
        let v = rng.gen_range(0.0..24.0);
        if v < 18.0 {
            -12.0 + v
        } else {
            6.0 + (v - 18.0)
        }
    } else {
        let magnitude = rng.gen_range(lo..=hi);
        if rng.gen_bool(0.5) {
            magnitude
        } else {
            -magnitude
        }
    }
}

fn contamination_counts(config: &SimConfig, sizes: &[usize]) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::with_capacity(sizes.len());
    for (t, &n_t) in sizes.iter().enumerate() {
        let c_inf = if config.outlier_frac_inf > 0.0 {
            (config.outlier_frac_inf * n_t as f64).ceil() as usize
        } else {
            0
        };
        let c_noise = if config.outlier_frac_noise > 0.0 {
            (config.outlier_frac_noise * n_t as f64).ceil() as usize
        } else {
            0
        };
        if c_inf + c_noise > n_t {
            return Err(Error::invalid(format!(
                "SimConfig: contamination fractions need {c_inf} + {c_noise} rows in group {} of size {n_t}",
                t + 1
            )));
        }
        out.push((c_inf, c_noise));
    }
    Ok(out)
}

/// Generate the uncontaminated dataset: Gaussian groups in the informative
/// block, standard normals in the noise block.
pub fn generate_clean(config: &SimConfig) -> Result<SimDataset> {
    config.validate()?;
    let seed = config.seed;
    let g = config.g;
    let p_inf = config.p_inf;
    let p = p_inf + config.p_noise;

    let sizes: Vec<usize> = match &config.group_sizes {
        GroupSizes::Fixed(v) => v.clone(),
        GroupSizes::Range { min, max } => {
            let mut rng = stream(seed, &[TAG_SIZES]);
            (0..g).map(|_| rng.gen_range(*min..=*max)).collect()
        }
    };
    let n: usize = sizes.iter().sum();

    let mut diagnostics = Vec::new();
    if p_inf < g {
        diagnostics.push("fewer_informative_variables_than_groups".into());
    }

    let mut means_rng = stream(seed, &[TAG_MEANS]);
    let means = group_means(g, p_inf, config.mu_range, &mut means_rng);

    let mut x = Array2::<f64>::zeros((n, p));
    let mut labels = Vec::with_capacity(n);
    let mut row = 0;
    for t in 0..g {
        let mut cov_rng = stream(seed, &[TAG_COV, t as u64]);
        let rho = cov_rng.gen_range(config.rho_range.0..=config.rho_range.1);
        let q = haar_rotation(p_inf, &mut cov_rng);
        let factor = CovFactor::new(p_inf, rho, &q);
        let mut sample_rng = stream(seed, &[TAG_SAMPLES, t as u64]);
        for _ in 0..sizes[t] {
            let vals = factor.sample(&means[t], &mut sample_rng);
            for j in 0..p_inf {
                x[[row, j]] = vals[j];
            }
            labels.push(t + 1);
            row += 1;
        }
    }

    let mut noise_rng = stream(seed, &[TAG_NOISE]);
    for i in 0..n {
        for j in p_inf..p {
            x[[i, j]] = StandardNormal.sample(&mut noise_rng);
        }
    }

    Ok(SimDataset {
        x,
        labels,
        outlier_inf_flags: vec![false; n],
        outlier_noise_flags: vec![false; n],
        informative_indices: (0..p_inf).collect(),
        config: config.clone(),
        diagnostics,
    })
}

/// Apply the contamination protocol to a clean dataset: the first rows of
/// each group are replaced across all informative variables (scattered or
/// uniform), and a random disjoint set of rows is overwritten in a random
/// subset of the noise variables. Pre-contamination labels are kept.
pub fn contaminate(clean: &SimDataset, config: &SimConfig, seed: u64) -> Result<SimDataset> {
    config.validate()?;
    if config.g != clean.config.g
        || config.p_inf != clean.config.p_inf
        || config.p_noise != clean.config.p_noise
    {
        return Err(Error::invalid(
            "contaminate: config shape does not match the dataset being contaminated",
        ));
    }
    let g = config.g;
    let p_inf = config.p_inf;
    let p_noise = config.p_noise;

    // group blocks are contiguous by construction
    let mut group_rows: Vec<Vec<usize>> = vec![Vec::new(); g];
    for (i, &label) in clean.labels.iter().enumerate() {
        group_rows[label - 1].push(i);
    }
    let sizes: Vec<usize> = group_rows.iter().map(|r| r.len()).collect();
    let counts = contamination_counts(config, &sizes)?;

    let mut ds = clean.clone();
    ds.config = config.clone();
    let mut means_rng = stream(clean.config.seed, &[TAG_MEANS]);
    let means = group_means(g, p_inf, clean.config.mu_range, &mut means_rng);

    // informative contamination: the first rows of each group
    for t in 0..g {
        let (c_inf, _) = counts[t];
        if c_inf == 0 {
            continue;
        }
        let mut rng = stream(seed, &[TAG_CONTAM, TAG_CONTAM_INF, t as u64]);
        match config.outlier_kind_inf {
            OutlierKind::Scattered => {
                let sigma = rng.gen_range(config.sigma_range.0..=config.sigma_range.1);
                let sd = sigma.sqrt();
                for &i in group_rows[t].iter().take(c_inf) {
                    for j in 0..p_inf {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        ds.x[[i, j]] = means[t][j] + sd * z;
                    }
                    ds.outlier_inf_flags[i] = true;
                }
            }
            OutlierKind::Uniform => {
                for &i in group_rows[t].iter().take(c_inf) {
                    for j in 0..p_inf {
                        ds.x[[i, j]] = draw_uniform_outlier(&mut rng, config.uniform_literal_interval);
                    }
                    ds.outlier_inf_flags[i] = true;
                }
            }
        }
    }

    // noise contamination: random rows disjoint from the informative set,
    // in one dataset-wide random subset of the noise variables
    let n_vars = (config.noise_contam_var_frac * p_noise as f64).ceil() as usize;
    let noise_vars: Vec<usize> = {
        let mut rng = stream(seed, &[TAG_CONTAM, TAG_CONTAM_NOISE_VARS]);
        let mut idx: Vec<usize> = (0..p_noise).collect();
        idx.shuffle(&mut rng);
        let mut chosen: Vec<usize> = idx.into_iter().take(n_vars).collect();
        chosen.sort_unstable();
        chosen
    };
    for t in 0..g {
        let (_, c_noise) = counts[t];
        if c_noise == 0 || noise_vars.is_empty() {
            continue;
        }
        let mut row_rng = stream(seed, &[TAG_CONTAM, TAG_CONTAM_NOISE_ROWS, t as u64]);
        let mut candidates: Vec<usize> = group_rows[t]
            .iter()
            .copied()
            .filter(|&i| !ds.outlier_inf_flags[i])
            .collect();
        candidates.shuffle(&mut row_rng);
        let mut value_rng = stream(seed, &[TAG_CONTAM, TAG_CONTAM_NOISE_VALUES, t as u64]);
        for &i in candidates.iter().take(c_noise) {
            for &jn in &noise_vars {
                ds.x[[i, p_inf + jn]] =
                    draw_uniform_outlier(&mut value_rng, config.uniform_literal_interval);
            }
            ds.outlier_noise_flags[i] = true;
        }
    }
    Ok(ds)
}

/// Generate a dataset with the full protocol: clean draw plus contamination.
pub fn generate(config: &SimConfig) -> Result<SimDataset> {
    let clean = generate_clean(config)?;
    contaminate(&clean, config, crate::rng::derive_seed(config.seed, &[TAG_CONTAM]))
}

/// Serialized dataset metadata.
#[derive(Debug, Serialize, Deserialize)]
struct SimMeta {
    config: SimConfig,
    labels: Vec<usize>,
    outlier_inf_flags: Vec<bool>,
    outlier_noise_flags: Vec<bool>,
    informative_indices: Vec<usize>,
    diagnostics: Vec<String>,
}

impl SimDataset {
    /// Write `X.csv` (no header), `labels.csv`, `flags.csv`, and `meta.json`
    /// into a directory.
    pub fn save_dir(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut xcsv = String::new();
        for i in 0..self.n() {
            let row: Vec<String> = (0..self.p()).map(|j| format!("{}", self.x[[i, j]])).collect();
            xcsv.push_str(&row.join(","));
            xcsv.push('\n');
        }
        fs::write(dir.join("X.csv"), xcsv)?;

        let mut lcsv = String::from("label\n");
        for l in &self.labels {
            lcsv.push_str(&format!("{l}\n"));
        }
        fs::write(dir.join("labels.csv"), lcsv)?;

        let mut fcsv = String::from("outlier_inf,outlier_noise\n");
        for i in 0..self.n() {
            fcsv.push_str(&format!(
                "{},{}\n",
                self.outlier_inf_flags[i] as u8, self.outlier_noise_flags[i] as u8
            ));
        }
        fs::write(dir.join("flags.csv"), fcsv)?;

        let meta = SimMeta {
            config: self.config.clone(),
            labels: self.labels.clone(),
            outlier_inf_flags: self.outlier_inf_flags.clone(),
            outlier_noise_flags: self.outlier_noise_flags.clone(),
            informative_indices: self.informative_indices.clone(),
            diagnostics: self.diagnostics.clone(),
        };
        fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }

    /// Load a dataset written by [`SimDataset::save_dir`].
    pub fn load_dir(dir: &Path) -> Result<SimDataset> {
        let meta: SimMeta = serde_json::from_str(
            &fs::read_to_string(dir.join("meta.json"))
                .map_err(|e| Error::invalid(format!("cannot read meta.json: {e}")))?,
        )
        .map_err(|e| Error::invalid(format!("cannot parse meta.json: {e}")))?;
        let x = crate::csvio::read_matrix(&dir.join("X.csv"))
            .map_err(|e| Error::invalid(format!("cannot read X.csv: {e}")))?;
        if x.nrows() != meta.labels.len() {
            return Err(Error::invalid("X.csv row count does not match meta.json labels"));
        }
        Ok(SimDataset {
            x,
            labels: meta.labels,
            outlier_inf_flags: meta.outlier_inf_flags,
            outlier_noise_flags: meta.outlier_noise_flags,
            informative_indices: meta.informative_indices,
            config: meta.config,
            diagnostics: meta.diagnostics,
        })
    }
}

/// Sample covariance of the rows of `x` (n-1 denominator).
pub fn sample_covariance(x: ArrayView2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let p = x.ncols();
    let mean: Vec<f64> = (0..p).map(|j| x.column(j).sum() / n as f64).collect();
    let mut cov = Array2::<f64>::zeros((p, p));
    for i in 0..n {
        for a in 0..p {
            let da = x[[i, a]] - mean[a];
            for b in a..p {
                let db = x[[i, b]] - mean[b];
                cov[[a, b]] += da * db;
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = cov[[a, b]] / (n - 1) as f64;
            cov[[a, b]] = v;
            cov[[b, a]] = v;
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn base_config(seed: u64) -> SimConfig {
        SimConfig {
            g: 3,
            group_sizes: GroupSizes::Fixed(vec![40, 40, 40]),
            p_inf: 50,
            p_noise: 750,
            mu_range: (3.0, 6.0),
            rho_range: (0.1, 0.9),
            sigma_range: (3.0, 10.0),
            outlier_frac_inf: 0.10,
            outlier_frac_noise: 0.10,
            noise_contam_var_frac: 0.10,
            outlier_kind_inf: OutlierKind::Scattered,
            uniform_literal_interval: false,
            seed,
        }
    }

    #[test]
    fn group_means_strided_patterns() {
        let mut rng = stream(1, &[0]);
        let means = group_means(4, 11, (3.0, 6.0), &mut rng);
        let support = |mu: &[f64]| -> Vec<usize> {
            mu.iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, _)| i)
                .collect()
        };
        assert_eq!(support(&means[0]), vec![0, 4, 8]);
        assert_eq!(support(&means[1]), vec![1, 5, 9]);
        assert_eq!(support(&means[2]), vec![2, 6, 10]);
        assert_eq!(support(&means[3]), vec![3, 7]);
        for mu in &means {
            for &v in mu.iter() {
                if v != 0.0 {
                    assert!((3.0..=6.0).contains(&v.abs()), "magnitude {v}");
                }
            }
        }
        // supports partition the coordinate set
        let mut all: Vec<usize> = means.iter().flat_map(|m| support(m)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..11).collect::<Vec<_>>());
    }

    #[test]
    fn group_means_single_group_full_support() {
        let mut rng = stream(2, &[0]);
        let means = group_means(1, 5, (3.0, 6.0), &mut rng);
        assert!(means[0].iter().all(|&v| v != 0.0));
    }

    #[test]
    fn rotation_is_orthonormal() {
        let mut rng = stream(3, &[0]);
        let q = haar_rotation(12, &mut rng);
        let qtq = q.t().dot(&q);
        for i in 0..12 {
            for j in 0..12 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (qtq[[i, j]] - want).abs() < 1e-10,
                    "QtQ[{i},{j}] = {}",
                    qtq[[i, j]]
                );
            }
        }
    }

    /// Dominant eigenvalue by power iteration from a fixed start.
    fn top_eigenvalue(m: &Array2<f64>) -> f64 {
        let p = m.nrows();
        let mut v = Array1::from_elem(p, 1.0 / (p as f64).sqrt());
        for _ in 0..500 {
            let mv = m.dot(&v);
            let norm = mv.dot(&mv).sqrt();
            v = mv / norm;
        }
        v.dot(&m.dot(&v))
    }

    #[test]
    fn covariance_spectrum_matches_equicorrelation() {
        let p = 8;
        let rho = 0.45;
        let mut rng = stream(4, &[0]);
        let sigma = group_covariance(p, rho, &mut rng).unwrap();

        // trace is preserved by rotation
        let trace: f64 = (0..p).map(|i| sigma[[i, i]]).sum();
        assert_abs_diff_eq!(trace, p as f64, epsilon = 1e-10);

        // top eigenvalue is 1 + (p-1) rho
        let lam = top_eigenvalue(&sigma);
        assert_abs_diff_eq!(lam, 1.0 + (p as f64 - 1.0) * rho, epsilon = 1e-8);

        // Frobenius identity pins the remaining spectrum at 1 - rho:
        // sum(lambda^2) = lam^2 + (p-1)(1-rho)^2
        let fro2: f64 = sigma.iter().map(|&v| v * v).sum();
        let want = lam * lam + (p as f64 - 1.0) * (1.0 - rho) * (1.0 - rho);
        assert_abs_diff_eq!(fro2, want, epsilon = 1e-8);

        // symmetry
        for i in 0..p {
            for j in 0..p {
                assert_abs_diff_eq!(sigma[[i, j]], sigma[[j, i]], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn covariance_rejects_rho_out_of_range() {
        let mut rng = stream(5, &[0]);
        assert!(group_covariance(4, 0.05, &mut rng).is_err());
        assert!(group_covariance(4, 0.95, &mut rng).is_err());
    }

    #[test]
    fn sample_covariance_matches_factor() {
        let p = 4;
        let rho = 0.6;
        let mut rng = stream(6, &[0]);
        let q = haar_rotation(p, &mut rng);
        let factor = CovFactor::new(p, rho, &q);
        let u = rotated_ones(&q);
        let mut draws = Array2::<f64>::zeros((10_000, p));
        let mu = vec![0.0; p];
        for i in 0..10_000 {
            let v = factor.sample(&mu, &mut rng);
            for j in 0..p {
                draws[[i, j]] = v[j];
            }
        }
        let cov = sample_covariance(draws.view());
        for a in 0..p {
            for b in 0..p {
                let want = if a == b { 1.0 } else { 0.0 } * (1.0 - rho) + rho * u[a] * u[b];
                assert!(
                    (cov[[a, b]] - want).abs() < 0.1,
                    "cov[{a},{b}] = {} want {want}",
                    cov[[a, b]]
                );
            }
        }
    }

    #[test]
    fn clean_generation_means_and_flags() {
        let mut config = base_config(11);
        config.g = 2;
        config.group_sizes = GroupSizes::Fixed(vec![200, 200]);
        config.p_inf = 6;
        config.p_noise = 4;
        config.rho_range = (0.1, 0.5);
        config.outlier_frac_inf = 0.0;
        config.outlier_frac_noise = 0.0;
        let ds = generate(&config).unwrap();
        assert!(ds.outlier_inf_flags.iter().all(|&f| !f));
        assert!(ds.outlier_noise_flags.iter().all(|&f| !f));
        assert_eq!(ds.labels[..200], vec![1; 200][..]);

        // per-group sample means stay within 4 * sd_max / sqrt(n) of mu
        let mut means_rng = stream(config.seed, &[TAG_MEANS]);
        let means = group_means(2, 6, config.mu_range, &mut means_rng);
        let sd_max = (1.0 + 5.0 * 0.5f64).sqrt();
        let bound = 4.0 * sd_max / (200.0f64).sqrt();
        for t in 0..2 {
            for j in 0..6 {
                let m: f64 = (0..200).map(|i| ds.x[[t * 200 + i, j]]).sum::<f64>() / 200.0;
                assert!(
                    (m - means[t][j]).abs() < bound,
                    "group {t} var {j}: mean {m} vs mu {}",
                    means[t][j]
                );
            }
        }
    }

    #[test]
    fn simulation_one_shape_and_flag_counts() {
        let config = base_config(7);
        let ds = generate(&config).unwrap();
        assert_eq!(ds.n(), 120);
        assert_eq!(ds.p(), 800);
        assert_eq!(ds.informative_indices, (0..50).collect::<Vec<_>>());
        // ceil(0.1 * 40) = 4 rows per group in each mechanism
        assert_eq!(ds.outlier_inf_flags.iter().filter(|&&f| f).count(), 12);
        assert_eq!(ds.outlier_noise_flags.iter().filter(|&&f| f).count(), 12);
        // disjoint mechanisms
        assert!(ds
            .outlier_inf_flags
            .iter()
            .zip(&ds.outlier_noise_flags)
            .all(|(&a, &b)| !(a && b)));
        // informative outliers are the first rows of each group
        for t in 0..3 {
            for i in 0..4 {
                assert!(ds.outlier_inf_flags[t * 40 + i]);
            }
        }
        // labels survive contamination
        assert_eq!(ds.labels.iter().filter(|&&l| l == 1).count(), 40);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let config = base_config(42);
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.outlier_noise_flags, b.outlier_noise_flags);
        let mut other = config.clone();
        other.seed = 43;
        let c = generate(&other).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn contaminate_zero_fractions_is_identity() {
        let mut config = base_config(9);
        config.outlier_frac_inf = 0.0;
        config.outlier_frac_noise = 0.0;
        let clean = generate_clean(&config).unwrap();
        let ds = contaminate(&clean, &config, 123).unwrap();
        assert_eq!(ds.x, clean.x);
        assert!(ds.outlier_flags().iter().all(|&f| !f));
    }

    #[test]
    fn contaminate_ladder_step_counts() {
        let mut config = base_config(10);
        config.p_inf = 17;
        config.p_noise = 83;
        let clean = generate_clean(&config).unwrap();
        let mut heavy = config.clone();
        heavy.outlier_frac_inf = 0.40;
        heavy.outlier_frac_noise = 0.10;
        let ds = contaminate(&clean, &heavy, 5).unwrap();
        // ceil(0.4 * 40) = 16 per group, ceil(0.1 * 40) = 4 per group
        assert_eq!(ds.outlier_inf_flags.iter().filter(|&&f| f).count(), 48);
        assert_eq!(ds.outlier_noise_flags.iter().filter(|&&f| f).count(), 12);
        // scattered rows keep their pre-contamination labels
        assert_eq!(ds.labels, clean.labels);
    }

    #[test]
    fn contaminate_rejects_impossible_fractions() {
        let mut config = base_config(12);
        config.group_sizes = GroupSizes::Fixed(vec![4, 4, 4]);
        config.outlier_frac_inf = 0.6;
        config.outlier_frac_noise = 0.6;
        let clean = generate_clean(&config).unwrap();
        assert!(contaminate(&clean, &config, 1).is_err());
    }

    #[test]
    fn uniform_outliers_land_in_the_advertised_interval() {
        let mut config = base_config(13);
        config.outlier_kind_inf = OutlierKind::Uniform;
        config.p_inf = 10;
        config.p_noise = 10;
        let ds = generate(&config).unwrap();
        for i in 0..ds.n() {
            if ds.outlier_inf_flags[i] {
                for j in 0..10 {
                    let v = ds.x[[i, j]].abs();
                    assert!((6.0..=12.0).contains(&v), "value {}", ds.x[[i, j]]);
                }
            }
        }
    }

    #[test]
    fn save_and_load_roundtrip() {
        let mut config = base_config(14);
        config.p_inf = 5;
        config.p_noise = 7;
        config.group_sizes = GroupSizes::Fixed(vec![8, 8, 8]);
        let ds = generate(&config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds");
        ds.save_dir(&path).unwrap();
        let back = SimDataset::load_dir(&path).unwrap();
        assert_eq!(back.x, ds.x);
        assert_eq!(back.labels, ds.labels);
        assert_eq!(back.outlier_inf_flags, ds.outlier_inf_flags);
        assert_eq!(back.informative_indices, ds.informative_indices);
    }

    #[test]
    fn size_range_is_sampled_within_bounds() {
        let mut config = base_config(15);
        config.group_sizes = GroupSizes::Range { min: 10, max: 20 };
        config.p_inf = 4;
        config.p_noise = 2;
        config.outlier_frac_inf = 0.0;
        config.outlier_frac_noise = 0.0;
        let ds = generate(&config).unwrap();
        for t in 1..=3 {
            let n_t = ds.labels.iter().filter(|&&l| l == t).count();
            assert!((10..=20).contains(&n_t), "group {t} size {n_t}");
        }
    }
}
