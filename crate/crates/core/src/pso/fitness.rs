//! The default swarm fitness: cross-validated accuracy of an internal model on
//! the masked columns, minus a size penalty.

use std::collections::HashMap;
use std::sync::Mutex;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::Fitness;
use crate::dataset::{make_folds_for_labels, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::learners::{accuracy, fit_logistic, train_ensemble, Classifier, EnsembleConfig, LogisticConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FitnessEvaluator {
    #[default]
    Logistic,
    /// The full voting ensemble; only practical for small pools.
    Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitnessConfig {
    pub folds: usize,
    pub evaluator: FitnessEvaluator,
    pub logistic: LogisticConfig,
    pub seed: u64,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            evaluator: FitnessEvaluator::Logistic,
            logistic: LogisticConfig::default(),
            seed: 0,
        }
    }
}

/// Mean stratified k-fold accuracy on the masked columns minus
/// `size_penalty * popcount / dim`.
pub struct SubsetFitness<'a, F: Scalar> {
    data: &'a Dataset<F>,
    plan: FoldPlan,
    cfg: FitnessConfig,
    ensemble: EnsembleConfig,
    size_penalty: f64,
}

impl<'a, F: Scalar> SubsetFitness<'a, F> {
    /// `data` holds only the pool columns of the training rows. The fold count
    /// shrinks to the smallest class size when needed.
    pub fn new(data: &'a Dataset<F>, cfg: &FitnessConfig, size_penalty: f64) -> Result<Self> {
        let smallest = data
            .class_counts()
            .into_iter()
            .filter(|&c| c > 0)
            .min()
            .unwrap_or(0);
        let k = cfg.folds.min(smallest);
        if k < 2 {
            return Err(Error::dataset(format!(
                "fitness folds are degenerate: smallest class has {smallest} samples"
            )));
        }
        let plan = make_folds_for_labels(data.labels(), data.n_classes(), k, cfg.seed)?;
        Ok(Self {
            data,
            plan,
            cfg: *cfg,
            ensemble: EnsembleConfig {
                logistic: cfg.logistic,
                ..EnsembleConfig::default()
            },
            size_penalty,
        })
    }

    pub fn with_ensemble_config(mut self, ensemble: EnsembleConfig) -> Self {
        self.ensemble = ensemble;
        self
    }

    pub fn folds(&self) -> usize {
        self.plan.k
    }

    pub fn cv_accuracy(&self, mask: &[bool]) -> Result<f64> {
        if mask.len() != self.data.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.data.n_features(),
                got: mask.len(),
            });
        }
        let cols: Vec<usize> = (0..mask.len()).filter(|&j| mask[j]).collect();
        if cols.is_empty() {
            return Err(Error::param("empty subset"));
        }
        let x = self.data.features().select(Axis(1), &cols);
        let y = self.data.labels();
        let classes = self.data.n_classes();
        // Wide subsets are fit in the row space of the training rows, which
        // leaves the L2 optimum and every prediction unchanged.
        let gram = (cols.len() > self.data.n_samples() && self.cfg.evaluator == FitnessEvaluator::Logistic)
            .then(|| x.dot(&x.t()));
        let mut total = 0.0;
        for f in 0..self.plan.k {
            let tr = self.plan.train_indices(f);
            let te = self.plan.test_indices(f);
            let ytr: Vec<usize> = tr.iter().map(|&i| y[i]).collect();
            let yte: Vec<usize> = te.iter().map(|&i| y[i]).collect();
            let pred = match self.cfg.evaluator {
                FitnessEvaluator::Logistic => {
                    let (qtr, qte) = match &gram {
                        Some(k) => row_space(k.view(), &tr, &te),
                        None => (x.select(Axis(0), &tr), x.select(Axis(0), &te)),
                    };
                    let m = fit_logistic(qtr.view(), &ytr, classes, &self.cfg.logistic)?;
                    m.predict(&qte)?
                }
                FitnessEvaluator::Ensemble => {
                    let sub = self.data.select_features(&cols)?;
                    let train = sub.select_rows(&tr)?;
                    let e = train_ensemble(&train, &self.ensemble, self.cfg.seed)?;
                    e.predict(&x.select(Axis(0), &te))?
                }
            };
            total += accuracy(&yte, &pred);
        }
        Ok(total / self.plan.k as f64)
    }
}

impl<F: Scalar> Fitness<F> for SubsetFitness<'_, F> {
    fn evaluate(&self, mask: &[bool]) -> Result<F> {
        let acc = self.cv_accuracy(mask)?;
        let frac = mask.iter().filter(|&&b| b).count() as f64 / mask.len() as f64;
        Ok(F::lit(acc - self.size_penalty * frac))
    }
}

/// Coordinates of the training and test rows in an orthonormal basis of the
/// span of the training rows, computed from the Gram matrix alone.
///
/// A pivoted Cholesky factor of the training Gram block picks `r` pivot rows
/// whose Gram block is `L1 L1'`; any row `x` maps to `L1^{-1} k`, where `k`
/// holds its inner products with the pivots.
fn row_space<F: Scalar>(gram: ArrayView2<'_, F>, tr: &[usize], te: &[usize]) -> (Array2<F>, Array2<F>) {
    let n = tr.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut diag: Vec<F> = tr.iter().map(|&i| gram[[i, i]]).collect();
    let trace: F = diag.iter().copied().sum();
    let tol = F::epsilon() * F::lit(1e3) * trace.max(F::min_positive_value());
    // l[k] is column k of the factor, indexed by position in `order`
    let mut l: Vec<Vec<F>> = Vec::new();
    for k in 0..n {
        let (piv, &dmax) = diag[k..]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite gram"))
            .map(|(i, d)| (i + k, d))
            .expect("non-empty");
        if dmax <= tol {
            break;
        }
        order.swap(k, piv);
        diag.swap(k, piv);
        for col in l.iter_mut() {
            col.swap(k, piv);
        }
        let root = dmax.sqrt();
        let mut col = vec![F::zero(); n];
        col[k] = root;
        for i in k + 1..n {
            let mut v = gram[[tr[order[i]], tr[order[k]]]];
            for prev in &l {
                v -= prev[i] * prev[k];
            }
            col[i] = v / root;
            diag[i] -= col[i] * col[i];
        }
        l.push(col);
    }
    let r = l.len();
    let pivots: Vec<usize> = order[..r].iter().map(|&p| tr[p]).collect();
    let project = |rows: &[usize]| {
        let mut out = Array2::zeros((rows.len(), r));
        for (o, &row) in rows.iter().enumerate() {
            // forward substitution against L1
            for k in 0..r {
                let mut v = gram[[row, pivots[k]]];
                for j in 0..k {
                    v -= l[j][k] * out[[o, j]];
                }
                out[[o, k]] = v / l[k][k];
            }
        }
        out
    };
    (project(tr), project(te))
}

/// Caches fitness values by mask. Sound because fitness is pure.
pub struct MemoFitness<'a, F, Fit: ?Sized> {
    inner: &'a Fit,
    cache: Mutex<HashMap<Vec<bool>, F>>,
}

impl<'a, F: Scalar, Fit: Fitness<F> + ?Sized> MemoFitness<'a, F, Fit> {
    pub fn new(inner: &'a Fit) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn distinct_evaluations(&self) -> usize {
        self.cache.lock().expect("fitness cache").len()
    }
}

impl<F: Scalar, Fit: Fitness<F> + ?Sized> Fitness<F> for MemoFitness<'_, F, Fit> {
    fn evaluate(&self, mask: &[bool]) -> Result<F> {
        if let Some(&v) = self.cache.lock().expect("fitness cache").get(mask) {
            return Ok(v);
        }
        let v = self.inner.evaluate(mask)?;
        self.cache.lock().expect("fitness cache").insert(mask.to_vec(), v);
        Ok(v)
    }
}
