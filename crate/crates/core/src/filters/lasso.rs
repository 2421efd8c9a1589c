//! L1-penalized least squares by cyclic coordinate descent.
//!
//! Minimizes `(1/2n) * ||y - b - X beta||^2 + lambda * ||beta||_1` with an
//! unpenalized intercept `b`. Columns and target are centered internally, so
//! the intercept decouples from the coordinate updates.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit<F: Scalar> {
    pub coefficients: Vec<F>,
    pub intercept: F,
    pub sweeps: usize,
    pub converged: bool,
}

#[inline]
fn soft_threshold<F: Scalar>(z: F, gamma: F) -> F {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        F::zero()
    }
}

struct Centered<F> {
    /// Feature-major copy: row j is centered feature j.
    cols: Array2<F>,
    x_means: Vec<F>,
    y: Vec<F>,
    y_mean: F,
}

fn center<F: Scalar>(x: ArrayView2<'_, F>, y: &[F]) -> Result<Centered<F>> {
    let (n, _) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if n == 0 {
        return Err(Error::param("LASSO needs at least one sample"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite LASSO input".into()));
    }
    let nf = F::from_count(n);
    let mut cols = x.t().to_owned();
    let mut x_means = Vec::with_capacity(cols.nrows());
    for mut col in cols.axis_iter_mut(Axis(0)) {
        let m = col.sum() / nf;
        col.mapv_inplace(|v| v - m);
        x_means.push(m);
    }
    let y_mean = y.iter().copied().sum::<F>() / nf;
    Ok(Centered {
        cols,
        x_means,
        y: y.iter().map(|&v| v - y_mean).collect(),
        y_mean,
    })
}

/// Smallest penalty at which every coefficient is zero: `max_j |x_j' y| / n`
/// on centered data.
pub fn lambda_max<F: Scalar>(x: ArrayView2<'_, F>, y: &[F]) -> Result<F> {
    let c = center(x, y)?;
    let n = F::from_count(y.len());
    Ok(c.cols
        .axis_iter(Axis(0))
        .map(|col| col.iter().zip(&c.y).map(|(&a, &b)| a * b).sum::<F>().abs() / n)
        .fold(F::zero(), F::max))
}

pub fn coordinate_descent<F: Scalar>(
    x: ArrayView2<'_, F>,
    y: &[F],
    lambda: F,
    max_sweeps: usize,
    tol: F,
) -> Result<LassoFit<F>> {
    if !(lambda >= F::zero()) {
        return Err(Error::param("lambda must be non-negative"));
    }
    let c = center(x, y)?;
    let p = c.cols.nrows();
    let n = F::from_count(y.len());
    let sq: Vec<F> = c
        .cols
        .axis_iter(Axis(0))
        .map(|col| col.iter().map(|&v| v * v).sum::<F>() / n)
        .collect();
    let mut beta = vec![F::zero(); p];
    let mut resid = c.y.clone();

    let update = |j: usize, beta: &mut [F], resid: &mut [F]| -> F {
        if sq[j] == F::zero() {
            return F::zero();
        }
        let col = c.cols.row(j);
        let dot: F = col.iter().zip(resid.iter()).map(|(&a, &r)| a * r).sum();
        let old = beta[j];
        let new = soft_threshold(dot / n + sq[j] * old, lambda) / sq[j];
        let delta = new - old;
        if delta != F::zero() {
            for (r, &a) in resid.iter_mut().zip(col.iter()) {
                *r -= a * delta;
            }
            beta[j] = new;
        }
        delta.abs()
    };

    let mut sweeps = 0;
    let mut converged = false;
    'outer: while sweeps < max_sweeps {
        // full pass over every coordinate
        let mut max_change = F::zero();
        for j in 0..p {
            max_change = max_change.max(update(j, &mut beta, &mut resid));
        }
        sweeps += 1;
        if max_change < tol {
            converged = true;
            break;
        }
        // then iterate on the active set until it settles
        let active: Vec<usize> = (0..p).filter(|&j| beta[j] != F::zero()).collect();
        while sweeps < max_sweeps {
            let mut change = F::zero();
            for &j in &active {
                change = change.max(update(j, &mut beta, &mut resid));
            }
            sweeps += 1;
            if change < tol {
                continue 'outer;
            }
        }
    }

    let intercept = c.y_mean
        - beta
            .iter()
            .zip(&c.x_means)
            .map(|(&b, &m)| b * m)
            .sum::<F>();
    Ok(LassoFit {
        coefficients: beta,
        intercept,
        sweeps,
        converged,
    })
}

/// One-vs-rest LASSO screen: row `c` of `coefficients` regresses the 0/1
/// indicator of class `c` on the features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LassoModel<F: Scalar> {
    pub coefficients: Array2<F>,
    pub lambda: F,
    pub intercepts: Vec<F>,
    pub iterations_used: usize,
}

impl<F: Scalar> LassoModel<F> {
    /// Features with a nonzero coefficient for at least one class.
    pub fn support(&self) -> Vec<bool> {
        self.coefficients
            .axis_iter(Axis(1))
            .map(|col| col.iter().any(|&b| b != F::zero()))
            .collect()
    }

    /// Largest absolute coefficient per feature.
    pub fn scores(&self) -> Vec<F> {
        self.coefficients
            .axis_iter(Axis(1))
            .map(|col| col.iter().fold(F::zero(), |m, &b| m.max(b.abs())))
            .collect()
    }
}

pub fn lasso_fit<F: Scalar>(
    train: &Dataset<F>,
    lambda: F,
    max_sweeps: usize,
    tol: F,
) -> Result<LassoModel<F>> {
    let classes = train.n_classes();
    let fits: Vec<LassoFit<F>> = (0..classes)
        .into_par_iter()
        .map(|c| {
            let y: Vec<F> = train
                .labels()
                .iter()
                .map(|&l| if l == c { F::one() } else { F::zero() })
                .collect();
            coordinate_descent(train.features().view(), &y, lambda, max_sweeps, tol)
        })
        .collect::<Result<_>>()?;
    let p = train.n_features();
    let mut coefficients = Array2::zeros((classes, p));
    for (c, fit) in fits.iter().enumerate() {
        coefficients.row_mut(c).assign(&ndarray::ArrayView1::from(&fit.coefficients));
    }
    Ok(LassoModel {
        coefficients,
        lambda,
        intercepts: fits.iter().map(|f| f.intercept).collect(),
        iterations_used: fits.iter().map(|f| f.sweeps).max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    fn random_design(n: usize, p: usize, s: u64) -> (Array2<f64>, Vec<f64>) {
        let mut rng = crate::seed::rng(s);
        let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-1.0..1.0));
        let y = (0..n).map(|i| x.row(i).sum() * 0.5 + rng.gen_range(-0.1..0.1) + 2.0).collect();
        (x, y)
    }

    #[test]
    fn lambda_max_zeroes_everything() {
        let (x, y) = random_design(30, 8, 1);
        let lm = lambda_max(x.view(), &y).unwrap();
        let fit = coordinate_descent(x.view(), &y, lm, 100, 1e-10).unwrap();
        assert!(fit.coefficients.iter().all(|&b| b == 0.0));
        let mean = y.iter().sum::<f64>() / 30.0;
        assert!((fit.intercept - mean).abs() < 1e-12);
        let below = coordinate_descent(x.view(), &y, lm * 0.9, 100, 1e-10).unwrap();
        assert!(below.coefficients.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn sweeps_bounded_and_errors() {
        let (x, y) = random_design(20, 5, 2);
        let fit = coordinate_descent(x.view(), &y, 0.0, 3, 0.0).unwrap();
        assert!(fit.sweeps <= 3);
        assert!(!fit.converged);
        assert!(coordinate_descent(x.view(), &y[..5], 0.1, 10, 1e-6).is_err());
        let mut bad = x.clone();
        bad[[0, 0]] = f64::NAN;
        assert!(coordinate_descent(bad.view(), &y, 0.1, 10, 1e-6).is_err());
    }

    #[test]
    fn sparsity_is_monotone_in_lambda() {
        let (x, y) = random_design(40, 15, 3);
        let lm = lambda_max(x.view(), &y).unwrap();
        let mut last = usize::MAX;
        for k in 0..10 {
            let lambda = lm * k as f64 / 9.0;
            let fit = coordinate_descent(x.view(), &y, lambda, 10_000, 1e-12).unwrap();
            let nnz = fit.coefficients.iter().filter(|&&b| b != 0.0).count();
            assert!(nnz <= last, "lambda {lambda}: {nnz} > {last}");
            last = nnz;
        }
        assert_eq!(last, 0);
    }
}
