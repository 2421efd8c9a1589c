use serde::{Deserialize, Serialize};

use super::metrics::{confusion, metrics, Averaging, MetricSet};
use super::roc::roc_auc;
use crate::dataset::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Class predictions with per-class probabilities for the same rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    pub classes: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
}

/// Anything that can be fit on one split and scored on another.
pub trait FoldModel<F: Scalar>: Sync {
    fn fit_predict(&self, train: &Dataset<F>, test: &Dataset<F>, seed: u64) -> Result<Predictions>;
}

/// Metrics plus AUC (when the truth holds at least two classes).
pub fn score_predictions(truth: &[usize], pred: &Predictions, n_classes: usize, averaging: Averaging) -> Result<MetricSet> {
    let cm = confusion(truth, &pred.classes, n_classes)?;
    let mut m = metrics(&cm, averaging)?;
    let distinct = truth.iter().any(|&t| t != truth[0]);
    if distinct && !pred.probabilities.is_empty() {
        m.auc = Some(roc_auc(truth, &pred.probabilities)?);
    }
    Ok(m)
}

/// Per-metric mean; AUC averages the folds or runs that have one.
pub fn mean_metrics(sets: &[MetricSet]) -> MetricSet {
    summarize(sets).0
}

/// Mean and sample standard deviation (0 for a single set).
pub fn summarize(sets: &[MetricSet]) -> (MetricSet, MetricSet) {
    let n = sets.len();
    let stat = |get: &dyn Fn(&MetricSet) -> Option<f64>| -> (Option<f64>, Option<f64>) {
        let vals: Vec<f64> = sets.iter().filter_map(get).collect();
        if vals.is_empty() {
            return (None, None);
        }
        let k = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / k;
        let std = if vals.len() < 2 {
            0.0
        } else {
            (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)).sqrt()
        };
        (Some(mean), Some(std))
    };
    let acc = stat(&|m| Some(m.accuracy));
    let pre = stat(&|m| Some(m.precision));
    let rec = stat(&|m| Some(m.recall));
    let f1 = stat(&|m| Some(m.f1));
    let auc = stat(&|m| m.auc);
    let wall: f64 = sets.iter().map(|m| m.wall_time).sum::<f64>() / n.max(1) as f64;
    let build = |pick: fn((Option<f64>, Option<f64>)) -> Option<f64>| MetricSet {
        accuracy: pick(acc).unwrap_or(0.0),
        precision: pick(pre).unwrap_or(0.0),
        recall: pick(rec).unwrap_or(0.0),
        f1: pick(f1).unwrap_or(0.0),
        auc: pick(auc),
        zero_division_classes: Vec::new(),
        wall_time: 0.0,
    };
    let mut mean = build(|t| t.0);
    mean.wall_time = wall;
    (mean, build(|t| t.1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub per_fold: Vec<MetricSet>,
    pub mean: MetricSet,
}

/// Fits `model` on each training fold and scores it on the held-out fold.
pub fn cross_validate<F: Scalar, M: FoldModel<F> + ?Sized>(
    data: &Dataset<F>,
    plan: &FoldPlan,
    model: &M,
    seed: u64,
    averaging: Averaging,
) -> Result<CvReport> {
    if plan.assignments.len() != data.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: data.n_samples(),
            got: plan.assignments.len(),
        });
    }
    let present: Vec<bool> = data.class_counts().iter().map(|&c| c > 0).collect();
    let mut per_fold = Vec::with_capacity(plan.k);
    for f in 0..plan.k {
        let train = data.select_rows(&plan.train_indices(f))?;
        let test = data.select_rows(&plan.test_indices(f))?;
        let counts = train.class_counts();
        if let Some(c) = (0..counts.len()).find(|&c| present[c] && counts[c] == 0) {
            return Err(Error::dataset(format!("training fold {f} has no samples of class {c}")));
        }
        let started = std::time::Instant::now();
        let pred = model.fit_predict(&train, &test, crate::seed::derive(seed, f as u64))?;
        let mut m = score_predictions(test.labels(), &pred, data.n_classes(), averaging)?;
        m.wall_time = started.elapsed().as_secs_f64();
        per_fold.push(m);
    }
    Ok(CvReport {
        folds: plan.k,
        mean: mean_metrics(&per_fold),
        per_fold,
    })
}

/// Runs `one_run` with seeds `base_seed + r` for `r` in `0..runs`.
pub fn repeated_runs<T>(runs: usize, base_seed: u64, mut one_run: impl FnMut(usize, u64) -> Result<T>) -> Result<Vec<T>> {
    if runs == 0 {
        return Err(Error::param("at least one run is required"));
    }
    (0..runs)
        .map(|r| one_run(r, base_seed.wrapping_add(r as u64)))
        .collect()
}
