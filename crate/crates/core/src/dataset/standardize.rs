use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Per-feature location and scale fitted on training rows.
/// Standard deviations use the population convention (divide by n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StandardizationParams<F: Scalar> {
    pub means: Vec<F>,
    pub std_devs: Vec<F>,
}

pub fn fit_standardizer<F: Scalar>(train: &Dataset<F>) -> StandardizationParams<F> {
    let n = F::from_count(train.n_samples());
    let mut means = Vec::with_capacity(train.n_features());
    let mut std_devs = Vec::with_capacity(train.n_features());
    for col in train.features().axis_iter(Axis(1)) {
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            // exactly constant: avoid a rounding-noise sigma
            means.push(first);
            std_devs.push(F::zero());
            continue;
        }
        let mean = col.iter().copied().sum::<F>() / n;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / n;
        means.push(mean);
        std_devs.push(var.sqrt());
    }
    StandardizationParams { means, std_devs }
}

/// Maps each cell to `(x - mean) / sd`; zero-sd features become exactly 0.
pub fn apply_standardizer<F: Scalar>(
    data: &Dataset<F>,
    params: &StandardizationParams<F>,
) -> Result<Dataset<F>> {
    let p = data.n_features();
    if params.means.len() != p || params.std_devs.len() != p {
        return Err(Error::DimensionMismatch {
            expected: params.means.len(),
            got: p,
        });
    }
    let mut out: Array2<F> = data.features().clone();
    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        let (mu, sd) = (params.means[j], params.std_devs[j]);
        if sd == F::zero() {
            col.fill(F::zero());
        } else {
            col.mapv_inplace(|v| (v - mu) / sd);
        }
    }
    data.with_features(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    fn ds(features: Array2<f64>) -> Dataset<f64> {
        let n = features.nrows();
        let p = features.ncols();
        Dataset::new(
            features,
            (0..n).map(|i| i % 2).collect(),
            (0..p).map(|i| format!("f{i}")).collect(),
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn two_point_and_constant_columns() {
        let d = ds(array![[1.0, 5.0], [3.0, 5.0], [2.0, 5.0]]);
        let p = fit_standardizer(&d);
        assert_eq!(p.means, vec![2.0, 5.0]);
        assert!((p.std_devs[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(p.std_devs[1], 0.0);

        let two = ds(array![[1.0], [3.0]]);
        let p2 = fit_standardizer(&two);
        assert_eq!((p2.means[0], p2.std_devs[0]), (2.0, 1.0));
        let s = apply_standardizer(&two, &p2).unwrap();
        assert_eq!(s.features().column(0).to_vec(), vec![-1.0, 1.0]);
    }

    #[test]
    fn zero_sigma_maps_to_zero_and_test_rows_use_train_params() {
        let d = ds(array![[1.0, 5.0], [3.0, 5.0]]);
        let p = fit_standardizer(&d);
        let test = ds(array![[5.0, 7.0], [2.0, 5.0]]);
        let s = apply_standardizer(&test, &p).unwrap();
        assert_eq!(s.features()[[0, 0]], 3.0);
        assert_eq!(s.features().column(1).to_vec(), vec![0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let d = ds(array![[1.0, 5.0], [3.0, 5.0]]);
        let p = StandardizationParams { means: vec![0.0], std_devs: vec![1.0] };
        assert!(apply_standardizer(&d, &p).is_err());
    }

    #[test]
    fn matches_two_pass_oracle_and_refit_is_identity() {
        let mut rng = crate::seed::rng(3);
        let m = Array2::from_shape_fn((50, 4), |(_, j)| rng.gen_range(-3.0..3.0) * (j + 1) as f64 + j as f64);
        let d = ds(m.clone());
        let p = fit_standardizer(&d);
        for j in 0..4 {
            let col: Vec<f64> = m.column(j).to_vec();
            let mean = col.iter().sum::<f64>() / 50.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 50.0;
            assert!((p.means[j] - mean).abs() < 1e-12);
            assert!((p.std_devs[j] - var.sqrt()).abs() < 1e-12);
        }
        let s = apply_standardizer(&d, &p).unwrap();
        let again = fit_standardizer(&s);
        for j in 0..4 {
            assert!(again.means[j].abs() < 1e-9);
            assert!((again.std_devs[j] - 1.0).abs() < 1e-9);
        }
    }
}
