//! Metrics, ROC analysis and the repeated-run / cross-validation protocol.

mod metrics;
mod protocol;
mod report;
mod roc;

pub use metrics::{confusion, metrics, Averaging, ConfusionMatrix, MetricSet};
pub use protocol::{
    cross_validate, mean_metrics, repeated_runs, score_predictions, summarize, CvReport, FoldModel, Predictions,
};
pub use report::{MemberMetrics, RunRecord, RunReport, REPORT_SCHEMA_VERSION};
pub use roc::{binary_auc, roc_auc, roc_points};
