//! Weighted robust and sparse k-means.
//!
//! A clustering toolkit for high-dimensional data containing both outliers
//! and noise variables. The core fitter combines three ingredients:
//!
//! * observation weights in `[0, 1]` derived from per-cluster LOF scores
//!   through a translated biweight, so outliers are downweighted instead of
//!   trimmed at a pre-specified rate;
//! * nonnegative variable weights under an l2/l1 (lasso-type) constraint
//!   set, so noise variables are driven to zero weight;
//! * a permutation-based gap statistic adjusted by the observation weights,
//!   which selects both the number of clusters `k` and the sparsity bound
//!   `s` without pre-knowledge.
//!
//! The crate also ships the classic baselines (k-means, trimmed k-means,
//! sparse k-means, and a double-trimming robust sparse variant), a synthetic
//! benchmark generator with controlled contamination, and evaluation
//! metrics (CER, TPR/FPR, weight summaries).
//!
//! See the `examples/` directory for runnable walkthroughs of each
//! capability, or the `wrsk` binary for the file-based command-line surface.

pub mod baselines;
pub mod cli;
pub mod csvio;
pub mod error;
pub mod eval;
pub mod fit;
pub mod gap;
pub mod model;
pub mod outlier;
pub mod rng;
pub mod robin;
pub mod simgen;
pub mod stats;

/// Observations in rows, variables in columns.
pub type DataMatrix = ndarray::Array2<f64>;

pub use error::{Error, Result};
pub use fit::fit;
pub use model::{ClusterModel, FitConfig};
