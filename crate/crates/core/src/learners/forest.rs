//! Bagged CART ensemble with per-split feature subsampling.

use ndarray::ArrayView1;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeConfig};
use super::{check_dims, Classifier};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features tried per split; `None` means `ceil(sqrt(p))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 10,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ForestModel<F: Scalar> {
    pub trees: Vec<DecisionTree<F>>,
    pub tree_seeds: Vec<u64>,
    pub feature_subsample: usize,
    pub n_features: usize,
    pub n_classes: usize,
}

pub fn train_forest<F: Scalar>(train: &Dataset<F>, cfg: &ForestConfig, seed_value: u64) -> Result<ForestModel<F>> {
    let (n, p) = train.features().dim();
    if n == 0 {
        return Err(Error::Empty("forest training set".into()));
    }
    if cfg.n_trees == 0 {
        return Err(Error::param("forest needs at least one tree"));
    }
    if n < cfg.min_samples_split {
        return Err(Error::dataset(format!(
            "{n} samples is below min_samples_split = {}",
            cfg.min_samples_split
        )));
    }
    let m = cfg
        .max_features
        .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
        .clamp(1, p);
    let tree_cfg = TreeConfig {
        max_depth: cfg.max_depth,
        min_samples_split: cfg.min_samples_split,
        min_samples_leaf: cfg.min_samples_leaf,
        max_features: Some(m),
    };
    let tree_seeds: Vec<u64> = (0..cfg.n_trees as u64).map(|t| seed::derive(seed_value, t)).collect();
    let x = train.features().view();
    let y = train.labels();
    let classes = train.n_classes();
    let trees = tree_seeds
        .par_iter()
        .map(|&s| {
            let mut rng = seed::rng(s);
            let rows: Vec<usize> = if cfg.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            DecisionTree::fit(x, y, classes, rows, tree_cfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        trees,
        tree_seeds,
        feature_subsample: m,
        n_features: p,
        n_classes: classes,
    })
}

impl<F: Scalar> ForestModel<F> {
    pub fn votes(&self, x: ArrayView1<'_, F>) -> Result<Vec<usize>> {
        check_dims(self.n_features, x.len())?;
        let mut votes = vec![0; self.n_classes];
        for t in &self.trees {
            votes[t.vote(x)] += 1;
        }
        Ok(votes)
    }

    /// Mean decrease in impurity, normalized to sum to 1. All zeros when no
    /// tree split at all.
    pub fn importances(&self) -> Vec<F> {
        let mut imp = vec![F::zero(); self.n_features];
        for t in &self.trees {
            let total: F = t.importances.iter().copied().sum();
            if total > F::zero() {
                for (acc, &v) in imp.iter_mut().zip(&t.importances) {
                    *acc += v / total;
                }
            }
        }
        let s: F = imp.iter().copied().sum();
        if s > F::zero() {
            for v in imp.iter_mut() {
                *v /= s;
            }
        }
        imp
    }
}

impl<F: Scalar> Classifier<F> for ForestModel<F> {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Vote fractions; the default argmax then picks the mode with ties to
    /// the lowest class.
    fn predict_proba_row(&self, x: ArrayView1<'_, F>) -> Result<Vec<F>> {
        let votes = self.votes(x)?;
        let m = F::from_count(self.trees.len());
        Ok(votes.into_iter().map(|v| F::from_count(v) / m).collect())
    }
}
