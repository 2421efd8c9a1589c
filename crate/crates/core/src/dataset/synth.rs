//! Desk-scale synthetic expression data with known informative features.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub p: usize,
    pub informative: usize,
    pub classes: usize,
    pub seed: u64,
    /// Distance between adjacent class means of an informative feature, in
    /// units of the within-class standard deviation.
    pub separation: f64,
}

impl SynthSpec {
    pub fn new(n: usize, p: usize, informative: usize, classes: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            informative,
            classes,
            seed,
            separation: 2.0,
        }
    }

    pub fn with_separation(mut self, separation: f64) -> Self {
        self.separation = separation;
        self
    }
}

/// Returns the dataset and the sorted indices of its informative features.
///
/// Every feature is `offset + scale * (class_mean + N(0,1))` with a random
/// per-feature offset and scale, so raw values look like unnormalized
/// expression levels. Noise features have zero class means. Informative
/// features place the C class means `separation` apart in a per-feature
/// random order.
pub fn synthesize<F: Scalar>(spec: &SynthSpec) -> Result<(Dataset<F>, Vec<usize>)> {
    let SynthSpec {
        n,
        p,
        informative,
        classes,
        seed: s,
        separation,
    } = *spec;
    if classes < 2 {
        return Err(Error::param("at least 2 classes required"));
    }
    if p == 0 || informative > p {
        return Err(Error::param(format!(
            "need 1 <= p and informative <= p, got p = {p}, informative = {informative}"
        )));
    }
    if n < 2 * classes {
        return Err(Error::param(format!(
            "need at least 2 samples per class, got n = {n} for {classes} classes"
        )));
    }
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(Error::param("separation must be finite and non-negative"));
    }

    let mut rng = seed::rng(s);
    let mut labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    labels.shuffle(&mut rng);

    let mut truth: Vec<usize> = index::sample(&mut rng, p, informative).into_vec();
    truth.sort_unstable();

    let mut class_means = vec![vec![0.0f64; classes]; p];
    let centre = (classes - 1) as f64 / 2.0;
    for &j in &truth {
        let mut order: Vec<usize> = (0..classes).collect();
        order.shuffle(&mut rng);
        for (c, &slot) in order.iter().enumerate() {
            class_means[j][c] = separation * (slot as f64 - centre);
        }
    }
    let offsets: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..8.0)).collect();
    let scales: Vec<f64> = (0..p).map(|_| rng.gen_range(0.5..2.0)).collect();

    let mut values = Vec::with_capacity(n * p);
    for &label in &labels {
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            values.push(F::lit(offsets[j] + scales[j] * (class_means[j][label] + z)));
        }
    }
    let features = Array2::from_shape_vec((n, p), values).map_err(|e| Error::dataset(e.to_string()))?;
    let width = (p - 1).to_string().len();
    let feature_names = (0..p).map(|j| format!("g{j:0width$}")).collect();
    let class_names = (0..classes).map(|c| format!("class{c}")).collect();
    Ok((Dataset::new(features, labels, feature_names, class_names)?, truth))
}

/// Truth sidecar: one feature index per line.
pub fn write_truth(path: impl AsRef<Path>, truth: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let wrap = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(wrap)?);
    for t in truth {
        writeln!(f, "{t}").map_err(wrap)?;
    }
    f.flush().map_err(wrap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_contract() {
        let (ds, truth) = synthesize::<f64>(&SynthSpec::new(80, 2000, 20, 2, 7)).unwrap();
        assert_eq!((ds.n_samples(), ds.n_features(), ds.n_classes()), (80, 2000, 2));
        assert_eq!(truth.len(), 20);
        assert!(truth.windows(2).all(|w| w[0] < w[1]));
        assert!(truth.iter().all(|&t| t < 2000));
        assert_eq!(ds.class_counts(), vec![40, 40]);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synthesize::<f64>(&SynthSpec::new(30, 50, 5, 3, 1)).unwrap();
        let b = synthesize::<f64>(&SynthSpec::new(30, 50, 5, 3, 1)).unwrap();
        let c = synthesize::<f64>(&SynthSpec::new(30, 50, 5, 3, 2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn informative_features_separate_class_means() {
        let (ds, truth) = synthesize::<f64>(&SynthSpec::new(400, 30, 3, 2, 11)).unwrap();
        for j in 0..30 {
            let col = ds.features().column(j);
            let mean = |c: usize| {
                let v: Vec<f64> = col.iter().zip(ds.labels()).filter(|(_, &l)| l == c).map(|(x, _)| *x).collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            let gap = (mean(0) - mean(1)).abs();
            if truth.contains(&j) {
                assert!(gap > 0.5, "informative feature {j} gap {gap}");
            }
        }
    }

    #[test]
    fn parameter_violations() {
        assert!(synthesize::<f64>(&SynthSpec::new(10, 5, 6, 2, 0)).is_err());
        assert!(synthesize::<f64>(&SynthSpec::new(10, 5, 1, 1, 0)).is_err());
        assert!(synthesize::<f64>(&SynthSpec::new(3, 5, 1, 2, 0)).is_err());
    }
}
