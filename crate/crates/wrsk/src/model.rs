//! Fitted-model record and fitting configuration shared by all clusterers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outlier::LofParams;
use crate::robin::RobinParams;

/// Result of any of the clustering fitters. Assignments are 1-based in the
/// serialized form and throughout the public API.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterModel {
    /// Fitting method ("wrsk", "kmeans", "tkc", "skc", "rskc").
    pub method: String,
    pub k: usize,
    /// Sparsity bound the variable weights were fitted under.
    pub s: f64,
    /// Per-observation cluster label in 1..=k.
    pub assignment: Vec<usize>,
    /// k x p cluster centers.
    pub centers: Vec<Vec<f64>>,
    /// Combined observation weight, elementwise min of `v1` and `v2`.
    pub v: Vec<f64>,
    /// Observation weights from the variable-weighted pass.
    pub v1: Vec<f64>,
    /// Observation weights from the raw-data pass.
    pub v2: Vec<f64>,
    /// Per-variable weights under the lasso constraint set.
    pub w: Vec<f64>,
    /// Achieved weighted between-cluster sum of squares.
    pub objective: f64,
    pub converged: bool,
    /// Outer-loop count actually performed.
    pub iterations: usize,
    /// True where `v` falls below the configured cutoff.
    pub outlier_flags: Vec<bool>,
    /// Trimming level, for the trimming-based baselines.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trim_alpha: Option<f64>,
    pub seed: u64,
    /// Conditions worth surfacing (biweight step mode, uniform-w fallback, ...).
    pub diagnostics: Vec<String>,
}

impl ClusterModel {
    /// Indices of the observations not flagged as outliers.
    pub fn kept_indices(&self) -> Vec<usize> {
        (0..self.outlier_flags.len())
            .filter(|&i| !self.outlier_flags[i])
            .collect()
    }

    pub fn n_outliers(&self) -> usize {
        self.outlier_flags.iter().filter(|&&f| f).count()
    }
}

/// Configuration of a single WRSK fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitConfig {
    pub k: usize,
    /// Sparsity bound, in (1, sqrt(p)].
    pub s: f64,
    /// Cap on assignment/weighting/center rounds inside step 1.
    pub lloyd_max_iter: usize,
    /// Cap on alternations between step 1 and the variable-weight update.
    pub outer_max_iter: usize,
    /// Relative l1-change threshold declaring the variable weights converged.
    pub w_tol: f64,
    /// Observations with combined weight below this are flagged as outliers.
    pub outlier_cutoff: f64,
    pub lof_params: LofParams,
    pub robin_params: RobinParams,
    pub seed: u64,
}

impl FitConfig {
    pub fn new(k: usize, s: f64) -> Self {
        FitConfig {
            k,
            s,
            lloyd_max_iter: 15,
            outer_max_iter: 20,
            w_tol: 1e-4,
            outlier_cutoff: 0.5,
            lof_params: LofParams::default(),
            robin_params: RobinParams::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Validate against the dimensionality of the data the fit will see.
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("FitConfig: k must be >= 1"));
        }
        let sqrt_p = (p as f64).sqrt();
        if !(self.s > 1.0 && self.s <= sqrt_p + 1e-12) {
            return Err(Error::invalid(format!(
                "FitConfig: s must lie in (1, sqrt(p)] = (1, {sqrt_p:.4}] (s={})",
                self.s
            )));
        }
        if self.lloyd_max_iter < 1 || self.outer_max_iter < 1 {
            return Err(Error::invalid("FitConfig: iteration caps must be >= 1"));
        }
        if !(self.outlier_cutoff > 0.0 && self.outlier_cutoff < 1.0) {
            return Err(Error::invalid("FitConfig: outlier_cutoff must lie in (0, 1)"));
        }
        if !(self.w_tol > 0.0) {
            return Err(Error::invalid("FitConfig: w_tol must be > 0"));
        }
        self.lof_params.validate()?;
        self.robin_params.validate()?;
        Ok(())
    }
}
