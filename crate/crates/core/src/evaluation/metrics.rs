use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> usize {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> usize {
        self.counts.iter().map(|row| row[class]).sum()
    }
}

pub fn confusion(truth: &[usize], predicted: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    let mut counts = vec![vec![0; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::param(format!(
                "label {} out of range for {n_classes} classes",
                t.max(p)
            )));
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Macro,
    /// Per-class values weighted by true-class support.
    Weighted,
}

/// Fractions in [0, 1]. `auc` is absent when it was not computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricSet {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: Option<f64>,
    /// Classes whose precision or recall was 0/0 and counted as 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub zero_division_classes: Vec<usize>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl MetricSet {
    pub const NAMES: [&'static str; 5] = ["Accuracy", "Precision", "Recall", "F1", "AUC"];

    /// Values in [`MetricSet::NAMES`] order; a missing AUC reads as NaN.
    pub fn values(&self) -> [f64; 5] {
        [
            self.accuracy,
            self.precision,
            self.recall,
            self.f1,
            self.auc.unwrap_or(f64::NAN),
        ]
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(cm: &ConfusionMatrix, averaging: Averaging) -> Result<MetricSet> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Empty("confusion matrix has no samples".into()));
    }
    let c = cm.n_classes();
    let mut zero_division = Vec::new();
    let (mut p_sum, mut r_sum, mut f_sum, mut w_sum) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..c {
        let tp = cm.counts[k][k];
        let precision = ratio(tp, cm.predicted(k));
        let recall = ratio(tp, cm.support(k));
        if precision.is_none() || recall.is_none() {
            zero_division.push(k);
        }
        let (p, r) = (precision.unwrap_or(0.0), recall.unwrap_or(0.0));
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let w = match averaging {
            Averaging::Macro => 1.0,
            Averaging::Weighted => cm.support(k) as f64,
        };
        p_sum += w * p;
        r_sum += w * r;
        f_sum += w * f;
        w_sum += w;
    }
    if !zero_division.is_empty() {
        log::warn!("precision or recall undefined for classes {zero_division:?}; counted as 0");
    }
    let trace: usize = (0..c).map(|k| cm.counts[k][k]).sum();
    Ok(MetricSet {
        accuracy: trace as f64 / total as f64,
        precision: p_sum / w_sum,
        recall: r_sum / w_sum,
        f1: f_sum / w_sum,
        auc: None,
        zero_division_classes: zero_division,
        wall_time: 0.0,
    })
}
