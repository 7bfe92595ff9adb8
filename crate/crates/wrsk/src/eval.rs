//! Evaluation metrics: classification error rate between partitions,
//! TPR/FPR of outlier detection, and summaries of the fitted weights
//! against the ground truth.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ClusterModel;
use crate::simgen::SimDataset;

/// Metrics of one fitted model against ground truth. Rates are `None` when
/// their denominator is empty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    /// Pairwise co-membership disagreement rate in [0, 1].
    pub cer: f64,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    /// Mean observation weight over the true outliers.
    pub v_bar_out: Option<f64>,
    /// Mean observation weight over the true non-outliers.
    pub v_bar_nonout: Option<f64>,
    /// Mean variable weight over the informative variables.
    pub w_bar_inf: Option<f64>,
    /// Mean variable weight over the variables with nonzero weight.
    pub w_bar_non0: Option<f64>,
    /// Mean variable weight over the noise variables.
    pub w_bar_noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_s: Option<f64>,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "method,cer,tpr,fpr,v_bar_out,v_bar_nonout,w_bar_inf,w_bar_non0,w_bar_noise,selected_k,selected_s";

    pub fn csv_row(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| format!("{x}")).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.cer,
            opt(self.tpr),
            opt(self.fpr),
            opt(self.v_bar_out),
            opt(self.v_bar_nonout),
            opt(self.w_bar_inf),
            opt(self.w_bar_non0),
            opt(self.w_bar_noise),
            self.selected_k.map(|k| k.to_string()).unwrap_or_default(),
            self.selected_s.map(|s| s.to_string()).unwrap_or_default(),
        )
    }
}

fn choose2(n: u64) -> u64 {
    n * (n.saturating_sub(1)) / 2
}

/// Classification error rate: the fraction of the `C(n, 2)` observation
/// pairs on which the two partitions disagree about co-membership. Computed
/// through a contingency table; invariant under relabeling either side.
pub fn cer(p: &[usize], q: &[usize]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid("cer: partitions must have equal length"));
    }
    let n = p.len();
    if n < 2 {
        return Err(Error::invalid("cer: need at least 2 observations"));
    }

    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&a, &b) in p.iter().zip(q.iter()) {
        *table.entry((a, b)).or_insert(0) += 1;
        *rows.entry(a).or_insert(0) += 1;
        *cols.entry(b).or_insert(0) += 1;
    }
    let same_both: u64 = table.values().map(|&c| choose2(c)).sum();
    let same_p: u64 = rows.values().map(|&c| choose2(c)).sum();
    let same_q: u64 = cols.values().map(|&c| choose2(c)).sum();
    let disagree = (same_p - same_both) + (same_q - same_both);
    Ok(disagree as f64 / choose2(n as u64) as f64)
}

/// True and false positive rates of predicted outlier flags. A zero
/// denominator (no actual positives, or no actual negatives) yields `None`
/// for the corresponding rate.
pub fn outlier_rates(pred: &[bool], truth: &[bool]) -> Result<(Option<f64>, Option<f64>)> {
    if pred.len() != truth.len() {
        return Err(Error::invalid("outlier_rates: length mismatch"));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut pos = 0usize;
    let mut neg = 0usize;
    for (&pr, &tr) in pred.iter().zip(truth.iter()) {
        if tr {
            pos += 1;
            if pr {
                tp += 1;
            }
        } else {
            neg += 1;
            if pr {
                fp += 1;
            }
        }
    }
    let tpr = (pos > 0).then(|| tp as f64 / pos as f64);
    let fpr = (neg > 0).then(|| fp as f64 / neg as f64);
    Ok((tpr, fpr))
}

fn mean_over(values: &[f64], idx: impl Iterator<Item = usize>) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in idx {
        sum += values[i];
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

/// Weight summaries of a fitted model against the ground truth: mean
/// observation weights split by true outlier status and mean variable
/// weights over the informative, nonzero, and noise variable sets.
pub fn weight_summaries(model: &ClusterModel, truth: &SimDataset) -> Result<EvalReport> {
    if model.v.len() != truth.n() || model.w.len() != truth.p() {
        return Err(Error::invalid("weight_summaries: model and truth shapes disagree"));
    }
    let out_flags = truth.outlier_flags();
    let v_bar_out = mean_over(&model.v, (0..truth.n()).filter(|&i| out_flags[i]));
    let v_bar_nonout = mean_over(&model.v, (0..truth.n()).filter(|&i| !out_flags[i]));
    let w_bar_inf = mean_over(&model.w, truth.informative_indices.iter().copied());
    let w_bar_non0 = mean_over(&model.w, (0..truth.p()).filter(|&j| model.w[j] > 0.0));
    let w_bar_noise = mean_over(&model.w, truth.noise_indices().into_iter());
    Ok(EvalReport {
        method: model.method.clone(),
        cer: 0.0,
        tpr: None,
        fpr: None,
        v_bar_out,
        v_bar_nonout,
        w_bar_inf,
        w_bar_non0,
        w_bar_noise,
        selected_k: None,
        selected_s: None,
    })
}

/// Full report: CER against pre-contamination labels (contaminated rows
/// keep their original group), outlier rates at the model's flags, and the
/// weight summaries.
pub fn evaluate(model: &ClusterModel, truth: &SimDataset) -> Result<EvalReport> {
    let mut report = weight_summaries(model, truth)?;
    report.cer = cer(&truth.labels, &model.assignment)?;
    let (tpr, fpr) = outlier_rates(&model.outlier_flags, &truth.outlier_flags())?;
    report.tpr = tpr;
    report.fpr = fpr;
    Ok(report)
}
