//! Sample-by-feature expression matrices with encoded class labels.

mod arff;
mod csv_io;
mod split;
mod standardize;
mod synth;

pub use arff::load_arff;
pub use csv_io::{load_csv, write_csv, LabelColumn};
pub use split::{make_folds, make_folds_for_labels, split, split_indices, FoldPlan, SplitSpec};
pub use standardize::{apply_standardizer, fit_standardizer, StandardizationParams};
pub use synth::{synthesize, write_truth, SynthSpec};

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Dataset<F: Scalar> {
    features: Array2<F>,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl<F: Scalar> Dataset<F> {
    /// Builds a dataset and checks every invariant: shape agreement, labels in
    /// range, at least two samples and one feature, finite values.
    pub fn new(
        features: Array2<F>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let ds = Self::from_parts(features, labels, feature_names, class_names)?;
        if ds.n_samples() < 2 {
            return Err(Error::dataset(format!(
                "at least 2 samples required, got {}",
                ds.n_samples()
            )));
        }
        Ok(ds)
    }

    /// Like [`Dataset::new`] but accepts a single sample. Used for row subsets.
    fn from_parts(
        features: Array2<F>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let (n, p) = features.dim();
        if n != labels.len() {
            return Err(Error::dataset(format!(
                "{n} feature rows but {} labels",
                labels.len()
            )));
        }
        if p == 0 {
            return Err(Error::dataset("at least one feature required"));
        }
        if n == 0 {
            return Err(Error::dataset("dataset has no samples"));
        }
        if feature_names.len() != p {
            return Err(Error::dataset(format!(
                "{p} feature columns but {} names",
                feature_names.len()
            )));
        }
        if class_names.is_empty() {
            return Err(Error::dataset("no classes declared"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::dataset(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        if let Some(((r, c), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::dataset(format!(
                "non-finite value at row {r}, column {c}"
            )));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            class_names,
        })
    }

    pub fn features(&self) -> &Array2<F> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Members per class, indexed by class id (absent classes count 0).
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows in the given order (duplicates allowed). Class names are kept, so
    /// `n_classes` is unchanged even when a class is missing from the subset.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.n_samples()) {
            return Err(Error::param(format!("row {r} out of range")));
        }
        Self::from_parts(
            self.features.select(Axis(0), rows),
            rows.iter().map(|&r| self.labels[r]).collect(),
            self.feature_names.clone(),
            self.class_names.clone(),
        )
    }

    /// Feature columns in the given order.
    pub fn select_features(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::param(format!("feature {c} out of range")));
        }
        Self::from_parts(
            self.features.select(Axis(1), columns),
            self.labels.clone(),
            columns.iter().map(|&c| self.feature_names[c].clone()).collect(),
            self.class_names.clone(),
        )
    }

    /// Same rows and names, different matrix (used by standardization).
    pub(crate) fn with_features(&self, features: Array2<F>) -> Result<Self> {
        if features.dim() != self.features.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: features.ncols(),
            });
        }
        Self::from_parts(
            features,
            self.labels.clone(),
            self.feature_names.clone(),
            self.class_names.clone(),
        )
    }

    /// Replaces the labels (e.g. for leakage canaries).
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        Self::from_parts(
            self.features.clone(),
            labels,
            self.feature_names.clone(),
            self.class_names.clone(),
        )
    }

    /// Converts to another scalar width.
    pub fn cast<G: Scalar>(&self) -> Dataset<G> {
        Dataset {
            features: self.features.mapv(|v| G::lit(v.as_f64())),
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
        }
    }
}
