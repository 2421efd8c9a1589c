//! Base classifiers and the voting combiner.

mod forest;
mod gbt;
pub mod lbfgs;
mod logistic;
mod tree;
mod voting;

pub use forest::{train_forest, ForestConfig, ForestModel};
pub use gbt::{train_gbt, BoostedClass, GbtConfig, GbtModel, RegNode, RegressionTree};
pub use logistic::{fit_logistic, logistic_objective, train_logistic, LogisticConfig, LogisticModel};
pub use tree::{DecisionTree, Node, TreeConfig};
pub use voting::{
    fit_vote_weights, member_accuracies, train_ensemble, EnsembleConfig, ModelFile, VoteMode,
    VotingEnsemble, MODEL_FORMAT_VERSION,
};

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A trained model that maps one feature row to class probabilities.
pub trait Classifier<F: Scalar>: Send + Sync {
    fn n_classes(&self) -> usize;
    fn n_features(&self) -> usize;
    fn predict_proba_row(&self, x: ArrayView1<'_, F>) -> Result<Vec<F>>;

    fn predict_row(&self, x: ArrayView1<'_, F>) -> Result<(usize, Vec<F>)> {
        let p = self.predict_proba_row(x)?;
        Ok((argmax(&p), p))
    }

    fn predict(&self, x: &Array2<F>) -> Result<Vec<usize>> {
        x.rows().into_iter().map(|r| self.predict_row(r).map(|t| t.0)).collect()
    }

    fn predict_proba(&self, x: &Array2<F>) -> Result<Vec<Vec<F>>> {
        x.rows().into_iter().map(|r| self.predict_proba_row(r)).collect()
    }
}

/// Index of the first maximum.
pub fn argmax<F: PartialOrd + Copy>(v: &[F]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub fn accuracy(truth: &[usize], predicted: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}
