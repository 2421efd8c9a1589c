use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::MetricSet;
use super::protocol::{summarize, CvReport};
use crate::error::{Error, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberMetrics {
    pub model: String,
    pub metrics: MetricSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub metrics: MetricSet,
    #[serde(default)]
    pub members: Vec<MemberMetrics>,
    pub pool_size: usize,
    pub selected_features: Vec<String>,
}

/// Everything in this report is a pure function of data, config and seeds;
/// timings and host details live in the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub dataset: String,
    pub base_seed: u64,
    pub config_fingerprint: String,
    pub runs: Vec<RunRecord>,
    pub mean: MetricSet,
    pub std: MetricSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_validation: Option<CvReport>,
}

impl RunReport {
    pub fn new(dataset: impl Into<String>, base_seed: u64, config_fingerprint: impl Into<String>, runs: Vec<RunRecord>) -> Self {
        let sets: Vec<MetricSet> = runs.iter().map(|r| r.metrics.clone()).collect();
        let (mean, std) = summarize(&sets);
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            dataset: dataset.into(),
            base_seed,
            config_fingerprint: config_fingerprint.into(),
            runs,
            mean,
            std,
            cross_validation: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a report, rejecting unknown schema versions.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == REPORT_SCHEMA_VERSION as u64 => Ok(serde_json::from_value(value)?),
            Some(v) => Err(Error::param(format!(
                "report schema version {v} is not supported (expected {REPORT_SCHEMA_VERSION})"
            ))),
            None => Err(Error::param("report has no schema_version")),
        }
    }

    /// `Run,<metrics>` rows in percent with two decimals, then `Avg` and `Std`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Run");
        for name in MetricSet::NAMES {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        let mut row = |label: &str, m: &MetricSet| {
            out.push_str(label);
            for v in m.values() {
                if v.is_nan() {
                    out.push_str(",NA");
                } else {
                    let _ = write!(out, ",{:.2}", v * 100.0);
                }
            }
            out.push('\n');
        };
        for r in &self.runs {
            row(&(r.run + 1).to_string(), &r.metrics);
        }
        row("Avg", &self.mean);
        row("Std", &self.std);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(run: usize, acc: f64) -> RunRecord {
        RunRecord {
            run,
            seed: run as u64,
            metrics: MetricSet {
                accuracy: acc,
                precision: acc,
                recall: acc,
                f1: acc,
                auc: Some(1.0),
                ..MetricSet::default()
            },
            members: Vec::new(),
            pool_size: 3,
            selected_features: vec!["g1".into()],
        }
    }

    #[test]
    fn csv_layout() {
        let r = RunReport::new("d", 0, "abc", vec![record(0, 0.95), record(1, 0.9)]);
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "Run,Accuracy,Precision,Recall,F1,AUC");
        assert_eq!(lines[1], "1,95.00,95.00,95.00,95.00,100.00");
        assert_eq!(lines[3].split(',').next(), Some("Avg"));
        assert!(lines[3].starts_with("Avg,92.50"));
        assert!(lines[4].starts_with("Std,3.54"));
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let r = RunReport::new("d", 7, "abc", vec![record(0, 0.5)]);
        let text = r.to_json().unwrap();
        assert_eq!(RunReport::from_json(&text).unwrap(), r);
        let bumped = text.replace("\"schema_version\": 1", "\"schema_version\": 99");
        assert!(RunReport::from_json(&bumped).is_err());
    }

    #[test]
    fn stored_summary_matches_recomputation() {
        let r = RunReport::new("d", 0, "x", (0..10).map(|i| record(i, 0.8 + i as f64 / 100.0)).collect());
        let accs: Vec<f64> = r.runs.iter().map(|x| x.metrics.accuracy).collect();
        let mean = accs.iter().sum::<f64>() / 10.0;
        let std = (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 9.0).sqrt();
        assert!((r.mean.accuracy - mean).abs() < 1e-12);
        assert!((r.std.accuracy - std).abs() < 1e-12);
    }
}
