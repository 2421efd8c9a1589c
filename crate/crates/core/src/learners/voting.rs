//! Hard or weighted vote over boosted trees, a random forest and logistic
//! regression.

use std::path::Path;

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use super::forest::{train_forest, ForestConfig, ForestModel};
use super::gbt::{train_gbt, GbtConfig, GbtModel};
use super::logistic::{train_logistic, LogisticConfig, LogisticModel};
use super::{accuracy, argmax, Classifier};
use crate::dataset::{split, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::{self, stream};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VoteMode {
    #[default]
    Hard,
    Weighted,
}

impl std::str::FromStr for VoteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hard" => Ok(VoteMode::Hard),
            "weighted" => Ok(VoteMode::Weighted),
            other => Err(Error::param(format!("unknown vote mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    pub gbt: GbtConfig,
    pub forest: ForestConfig,
    pub logistic: LogisticConfig,
    pub vote: VoteMode,
    /// Share of the training rows held out to score members for weighted
    /// voting. Members are refit on all rows afterwards.
    pub weight_holdout: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            gbt: GbtConfig::default(),
            forest: ForestConfig::default(),
            logistic: LogisticConfig::default(),
            vote: VoteMode::Hard,
            weight_holdout: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct VotingEnsemble<F: Scalar> {
    pub gbt: GbtModel<F>,
    pub forest: ForestModel<F>,
    pub logistic: LogisticModel<F>,
    pub mode: VoteMode,
    /// Member weights in [GBT, RF, LR] order; uniform in hard mode.
    pub weights: [f64; 3],
}

/// Weights proportional to accuracy; uniform when every accuracy is zero.
pub fn fit_vote_weights(accuracies: [f64; 3]) -> [f64; 3] {
    let clipped = accuracies.map(|a| if a.is_finite() { a.max(0.0) } else { 0.0 });
    let total: f64 = clipped.iter().sum();
    if total > 0.0 {
        clipped.map(|a| a / total)
    } else {
        [1.0 / 3.0; 3]
    }
}

fn members<F: Scalar>(
    train: &Dataset<F>,
    cfg: &EnsembleConfig,
    seed_value: u64,
) -> Result<(GbtModel<F>, ForestModel<F>, LogisticModel<F>)> {
    let (gbt, (forest, logistic)) = rayon::join(
        || train_gbt(train, &cfg.gbt, seed::derive(seed_value, stream::GBT)),
        || {
            rayon::join(
                || train_forest(train, &cfg.forest, seed::derive(seed_value, stream::FOREST)),
                || train_logistic(train, &cfg.logistic),
            )
        },
    );
    Ok((gbt?, forest?, logistic?))
}

impl<F: Scalar> VotingEnsemble<F> {
    fn member_classes(&self, x: ArrayView1<'_, F>) -> Result<[usize; 3]> {
        Ok([
            self.gbt.predict_row(x)?.0,
            self.forest.predict_row(x)?.0,
            self.logistic.predict_row(x)?.0,
        ])
    }

    /// Ensemble class and the three member classes.
    pub fn vote(&self, x: ArrayView1<'_, F>) -> Result<(usize, [usize; 3])> {
        let m = self.member_classes(x)?;
        let class = match self.mode {
            VoteMode::Hard => hard_vote(m),
            VoteMode::Weighted => weighted_vote(m, self.weights, self.n_classes()),
        };
        Ok((class, m))
    }

    pub fn member_predictions(&self, x: &ndarray::Array2<F>) -> Result<[Vec<usize>; 3]> {
        Ok([self.gbt.predict(x)?, self.forest.predict(x)?, self.logistic.predict(x)?])
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            ensemble: self.clone(),
        };
        let text = serde_json::to_string(&file)?;
        std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let file: ModelFile<F> = serde_json::from_str(&text)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::param(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        Ok(file.ensemble)
    }
}

/// Mode of three classes; with three distinct classes the GBT vote wins.
pub(crate) fn hard_vote(m: [usize; 3]) -> usize {
    if m[1] == m[2] && m[0] != m[1] {
        m[1]
    } else {
        m[0]
    }
}

pub(crate) fn weighted_vote(m: [usize; 3], w: [f64; 3], n_classes: usize) -> usize {
    let mut score = vec![0.0; n_classes.max(m.iter().max().map_or(0, |&c| c + 1))];
    for (&c, &wi) in m.iter().zip(&w) {
        score[c] += wi;
    }
    argmax(&score)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelFile<F: Scalar> {
    pub format_version: u32,
    pub ensemble: VotingEnsemble<F>,
}

/// Accuracy of each member on `validation`, in [GBT, RF, LR] order.
pub fn member_accuracies<F: Scalar>(
    gbt: &GbtModel<F>,
    forest: &ForestModel<F>,
    logistic: &LogisticModel<F>,
    validation: &Dataset<F>,
) -> Result<[f64; 3]> {
    let x = validation.features();
    let y = validation.labels();
    Ok([
        accuracy(y, &gbt.predict(x)?),
        accuracy(y, &forest.predict(x)?),
        accuracy(y, &logistic.predict(x)?),
    ])
}

pub fn train_ensemble<F: Scalar>(train: &Dataset<F>, cfg: &EnsembleConfig, seed_value: u64) -> Result<VotingEnsemble<F>> {
    let weights = match cfg.vote {
        VoteMode::Hard => [1.0 / 3.0; 3],
        VoteMode::Weighted => {
            let spec = SplitSpec {
                train_fraction: 1.0 - cfg.weight_holdout,
                seed: seed::derive(seed_value, stream::VOTE_WEIGHTS),
                stratified: true,
            };
            let scored = split(train, &spec).and_then(|(fit, hold)| {
                let (g, f, l) = members(&fit, cfg, seed_value)?;
                member_accuracies(&g, &f, &l, &hold)
            });
            match scored {
                Ok(acc) => fit_vote_weights(acc),
                Err(e) => {
                    log::warn!("could not score members for weighting ({e}); using uniform weights");
                    [1.0 / 3.0; 3]
                }
            }
        }
    };
    let (gbt, forest, logistic) = members(train, cfg, seed_value)?;
    Ok(VotingEnsemble {
        gbt,
        forest,
        logistic,
        mode: cfg.vote,
        weights,
    })
}

impl<F: Scalar> Classifier<F> for VotingEnsemble<F> {
    fn n_classes(&self) -> usize {
        self.logistic.n_classes()
    }

    fn n_features(&self) -> usize {
        self.logistic.n_features()
    }

    /// Weighted mean of the member probability vectors.
    fn predict_proba_row(&self, x: ArrayView1<'_, F>) -> Result<Vec<F>> {
        let parts = [
            self.gbt.predict_proba_row(x)?,
            self.forest.predict_proba_row(x)?,
            self.logistic.predict_proba_row(x)?,
        ];
        let mut out = vec![F::zero(); self.n_classes()];
        for (probs, &w) in parts.iter().zip(&self.weights) {
            for (o, &p) in out.iter_mut().zip(probs) {
                *o += F::lit(w) * p;
            }
        }
        Ok(out)
    }

    fn predict_row(&self, x: ArrayView1<'_, F>) -> Result<(usize, Vec<F>)> {
        Ok((self.vote(x)?.0, self.predict_proba_row(x)?))
    }
}
