//! Multinomial logistic regression with an L2 penalty on the weights.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::lbfgs::{minimize, LbfgsOptions};
use super::{check_dims, Classifier};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2: 1.0,
            max_iter: 1000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LogisticModel<F: Scalar> {
    /// C x p.
    pub weights: Array2<F>,
    pub bias: Vec<F>,
    pub l2_strength: F,
    pub max_iter: usize,
    pub iterations: usize,
    pub converged: bool,
}

fn softmax_in_place<F: Scalar>(z: &mut [F]) {
    let m = z.iter().copied().fold(F::neg_infinity(), F::max);
    let mut s = F::zero();
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    for v in z.iter_mut() {
        *v /= s;
    }
}

/// Objective and gradient at `params`, laid out as the row-major C x p
/// weight matrix followed by the C biases.
///
/// The objective is `(1/n) * (sum of cross-entropies + (l2/2) * ||W||^2)`.
pub fn logistic_objective<F: Scalar>(
    x: ArrayView2<'_, F>,
    y: &[usize],
    n_classes: usize,
    l2: F,
    params: &[F],
) -> (F, Vec<F>) {
    let (n, p) = x.dim();
    let c = n_classes;
    let w = ArrayView2::from_shape((c, p), &params[..c * p]).expect("param layout");
    let b = &params[c * p..];
    let mut scores = x.dot(&w.t()).as_standard_layout().into_owned();
    let mut loss = F::zero();
    for (i, mut row) in scores.rows_mut().into_iter().enumerate() {
        let z = row.as_slice_mut().expect("contiguous");
        for (zk, &bk) in z.iter_mut().zip(b) {
            *zk += bk;
        }
        let m = z.iter().copied().fold(F::neg_infinity(), F::max);
        let lse = m + z.iter().map(|&v| (v - m).exp()).sum::<F>().ln();
        loss += lse - z[y[i]];
        for v in z.iter_mut() {
            *v = (*v - lse).exp();
        }
        z[y[i]] -= F::one();
    }
    // scores now holds (p_i - e_{y_i})
    let nf = F::from_count(n);
    let gw = scores.t().dot(&x);
    let mut grad = Vec::with_capacity(params.len());
    let mut reg = F::zero();
    for (g, &wv) in gw.iter().zip(w.iter()) {
        grad.push((*g + l2 * wv) / nf);
        reg += wv * wv;
    }
    for k in 0..c {
        grad.push(scores.column(k).sum() / nf);
    }
    ((loss + l2 * F::lit(0.5) * reg) / nf, grad)
}

pub fn train_logistic<F: Scalar>(train: &Dataset<F>, cfg: &LogisticConfig) -> Result<LogisticModel<F>> {
    fit_logistic(train.features().view(), train.labels(), train.n_classes(), cfg)
}

/// Fits on a raw design matrix. Used directly by the swarm fitness to avoid
/// building intermediate datasets.
pub fn fit_logistic<F: Scalar>(
    x: ArrayView2<'_, F>,
    y: &[usize],
    n_classes: usize,
    cfg: &LogisticConfig,
) -> Result<LogisticModel<F>> {
    let (n, p) = x.dim();
    if n == 0 || y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if !(cfg.l2 >= 0.0) {
        return Err(Error::param("l2 strength must be non-negative"));
    }
    let c = n_classes;
    let l2 = F::lit(cfg.l2);
    let res = minimize(
        |theta: &[F]| logistic_objective(x, y, c, l2, theta),
        vec![F::zero(); c * p + c],
        LbfgsOptions {
            memory: 10,
            max_iter: cfg.max_iter,
            gtol: F::lit(cfg.tol),
        },
    );
    if !res.value.is_finite() || res.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "logistic loss became non-finite; are the features standardized?".into(),
        ));
    }
    let weights = Array2::from_shape_vec((c, p), res.x[..c * p].to_vec()).expect("layout");
    Ok(LogisticModel {
        weights,
        bias: res.x[c * p..].to_vec(),
        l2_strength: l2,
        max_iter: cfg.max_iter,
        iterations: res.iterations,
        converged: res.converged,
    })
}

impl<F: Scalar> Classifier<F> for LogisticModel<F> {
    fn n_classes(&self) -> usize {
        self.bias.len()
    }

    fn n_features(&self) -> usize {
        self.weights.ncols()
    }

    fn predict_proba_row(&self, x: ArrayView1<'_, F>) -> Result<Vec<F>> {
        check_dims(self.n_features(), x.len())?;
        let mut z: Vec<F> = self
            .weights
            .rows()
            .into_iter()
            .zip(&self.bias)
            .map(|(w, &b)| w.dot(&x) + b)
            .collect();
        softmax_in_place(&mut z);
        Ok(z)
    }

    fn predict_row(&self, x: ArrayView1<'_, F>) -> Result<(usize, Vec<F>)> {
        let p = self.predict_proba_row(x)?;
        let class = if p.len() == 2 {
            usize::from(p[1] >= F::lit(0.5))
        } else {
            super::argmax(&p)
        };
        Ok((class, p))
    }
}
