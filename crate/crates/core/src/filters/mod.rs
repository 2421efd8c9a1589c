//! The five filter scorers and their threshold rules.

mod anova;
mod contingency;
mod lasso;
pub mod special;

pub use anova::{anova_f, AnovaDecomposition};
pub use contingency::{chi_square, discretize, mutual_information, ContingencyTable};
pub use lasso::{coordinate_descent, lambda_max, lasso_fit, LassoFit, LassoModel};

use ndarray::Axis;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{nonfinite, Scalar};

/// Population variance of every feature column.
pub fn variance_scores<F: Scalar>(data: &Dataset<F>) -> Vec<F> {
    let n = F::from_count(data.n_samples());
    data.features()
        .axis_iter(Axis(1))
        .map(|col| {
            let mean = col.iter().copied().sum::<F>() / n;
            col.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / n
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMethod {
    MutualInformation,
    ChiSquare,
    Anova,
    Lasso,
    Variance,
}

impl FilterMethod {
    pub const ALL: [FilterMethod; 5] = [
        FilterMethod::MutualInformation,
        FilterMethod::ChiSquare,
        FilterMethod::Anova,
        FilterMethod::Lasso,
        FilterMethod::Variance,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            FilterMethod::MutualInformation => "MI",
            FilterMethod::ChiSquare => "Chi2",
            FilterMethod::Anova => "ANOVA",
            FilterMethod::Lasso => "LASSO",
            FilterMethod::Variance => "Variance",
        }
    }
}

/// How the chi-square threshold is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChiSquareMode {
    /// Select when the upper-tail p-value is below the threshold.
    #[default]
    PValue,
    /// Select when the raw statistic exceeds the threshold.
    Statistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterThresholds {
    pub mi: f64,
    pub chi2: f64,
    pub anova_f: f64,
    pub lasso_lambda: f64,
    pub variance: f64,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        Self {
            mi: 0.05,
            chi2: 0.01,
            anova_f: 5.0,
            lasso_lambda: 0.01,
            variance: 0.001,
        }
    }
}

impl FilterThresholds {
    pub fn validate(&self) -> Result<()> {
        let all = [self.mi, self.chi2, self.anova_f, self.lasso_lambda, self.variance];
        if all.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::param("filter thresholds must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub thresholds: FilterThresholds,
    pub bins: usize,
    pub chi2_mode: ChiSquareMode,
    pub lasso_max_sweeps: usize,
    pub lasso_tol: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            thresholds: FilterThresholds::default(),
            bins: 10,
            chi2_mode: ChiSquareMode::PValue,
            lasso_max_sweeps: 1000,
            lasso_tol: 1e-6,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()?;
        if self.bins < 2 {
            return Err(Error::param("at least 2 bins required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MethodResult<F: Scalar> {
    pub method: FilterMethod,
    #[serde(with = "nonfinite::vec")]
    pub scores: Vec<F>,
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FilterReport<F: Scalar> {
    /// One entry per method in [`FilterMethod::ALL`] order.
    pub methods: Vec<MethodResult<F>>,
    pub chi2_p_values: Vec<F>,
    pub thresholds: FilterThresholds,
    pub chi2_mode: ChiSquareMode,
    pub bins_used: usize,
}

impl<F: Scalar> FilterReport<F> {
    pub fn n_features(&self) -> usize {
        self.methods.first().map_or(0, |m| m.mask.len())
    }

    pub fn result(&self, method: FilterMethod) -> &MethodResult<F> {
        self.methods
            .iter()
            .find(|m| m.method == method)
            .expect("report holds every method")
    }

    pub fn mask(&self, method: FilterMethod) -> &[bool] {
        &self.result(method).mask
    }

    pub fn scores(&self, method: FilterMethod) -> &[F] {
        &self.result(method).scores
    }
}

/// Scores every feature with the five filters.
///
/// `standardized` feeds ANOVA and LASSO. `raw` (same rows, before scaling)
/// feeds the binned MI and chi-square scorers and the variance screen.
pub fn run_filters<F: Scalar>(
    standardized: &Dataset<F>,
    raw: &Dataset<F>,
    cfg: &FilterConfig,
) -> Result<FilterReport<F>> {
    cfg.validate()?;
    if standardized.features().dim() != raw.features().dim()
        || standardized.labels() != raw.labels()
    {
        return Err(Error::param(
            "standardized and raw training sets must hold the same rows",
        ));
    }
    let y = raw.labels();
    let classes = raw.n_classes();
    let bins = cfg.bins;
    let th = cfg.thresholds;

    // per-feature scorers: (mi, chi2, chi2 p, anova)
    let per_feature: Vec<(F, F, F, F)> = (0..raw.n_features())
        .into_par_iter()
        .map(|j| {
            let raw_col: Vec<F> = raw.features().column(j).to_vec();
            let codes = discretize(&raw_col, bins);
            let table = ContingencyTable::<F>::from_codes(&codes, y, bins, classes)?;
            let chi = table.chi_square();
            let p = special::chi_square_sf(chi, table.dof());
            let std_col: Vec<F> = standardized.features().column(j).to_vec();
            let f = anova_f(&std_col, y)?;
            Ok((table.mutual_information(), chi, p, f))
        })
        .collect::<Result<_>>()?;

    let lasso = lasso_fit(
        standardized,
        F::lit(th.lasso_lambda),
        cfg.lasso_max_sweeps,
        F::lit(cfg.lasso_tol),
    )?;
    let variance = variance_scores(raw);

    let mi: Vec<F> = per_feature.iter().map(|t| t.0).collect();
    let chi: Vec<F> = per_feature.iter().map(|t| t.1).collect();
    let chi_p: Vec<F> = per_feature.iter().map(|t| t.2).collect();
    let anova: Vec<F> = per_feature.iter().map(|t| t.3).collect();

    let chi_mask = match cfg.chi2_mode {
        ChiSquareMode::PValue => chi_p.iter().map(|&p| p < F::lit(th.chi2)).collect(),
        ChiSquareMode::Statistic => chi.iter().map(|&s| s > F::lit(th.chi2)).collect(),
    };
    let methods = vec![
        MethodResult {
            method: FilterMethod::MutualInformation,
            mask: mi.iter().map(|&s| s > F::lit(th.mi)).collect(),
            scores: mi,
        },
        MethodResult {
            method: FilterMethod::ChiSquare,
            mask: chi_mask,
            scores: chi,
        },
        MethodResult {
            method: FilterMethod::Anova,
            mask: anova.iter().map(|&s| s > F::lit(th.anova_f)).collect(),
            scores: anova,
        },
        MethodResult {
            method: FilterMethod::Lasso,
            mask: lasso.support(),
            scores: lasso.scores(),
        },
        MethodResult {
            method: FilterMethod::Variance,
            mask: variance.iter().map(|&v| v > F::lit(th.variance)).collect(),
            scores: variance,
        },
    ];
    Ok(FilterReport {
        methods,
        chi2_p_values: chi_p,
        thresholds: th,
        chi2_mode: cfg.chi2_mode,
        bins_used: bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{apply_standardizer, fit_standardizer, synthesize, SynthSpec};
    use ndarray::Array2;

    fn prepare(raw: &Dataset<f64>) -> Dataset<f64> {
        apply_standardizer(raw, &fit_standardizer(raw)).unwrap()
    }

    #[test]
    fn variance_examples() {
        let ds = Dataset::new(
            ndarray::array![[0.0, 3.0], [2.0, 3.0]],
            vec![0, 1],
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        assert_eq!(variance_scores(&ds), vec![1.0, 0.0]);
    }

    #[test]
    fn perfect_predictor_selected_by_all_five() {
        let (base, _) = synthesize::<f64>(&SynthSpec::new(60, 30, 0, 2, 4)).unwrap();
        let mut m: Array2<f64> = base.features().clone();
        for (i, &l) in base.labels().iter().enumerate() {
            m[[i, 0]] = l as f64;
        }
        // a constant column as well
        m.column_mut(1).fill(7.5);
        let raw = Dataset::new(m, base.labels().to_vec(), base.feature_names().to_vec(), base.class_names().to_vec()).unwrap();
        let report = run_filters(&prepare(&raw), &raw, &FilterConfig::default()).unwrap();
        for method in FilterMethod::ALL {
            assert!(report.mask(method)[0], "{method:?} missed the perfect predictor");
        }
        assert!(!report.mask(FilterMethod::Variance)[1]);
        for method in FilterMethod::ALL {
            assert_eq!(report.scores(method)[1], 0.0, "{method:?}");
            assert!(!report.mask(method)[1]);
        }
    }

    #[test]
    fn noise_rarely_passes_mi() {
        let mut fractions = Vec::new();
        for s in 0..10 {
            let (raw, _) = synthesize::<f64>(&SynthSpec::new(200, 200, 0, 2, s)).unwrap();
            let report = run_filters(&prepare(&raw), &raw, &FilterConfig::default()).unwrap();
            let sel = report.mask(FilterMethod::MutualInformation).iter().filter(|&&b| b).count();
            fractions.push(sel as f64 / 200.0);
        }
        let mean = fractions.iter().sum::<f64>() / 10.0;
        assert!(mean < 0.2, "MI selected {mean} of pure noise");
    }

    #[test]
    fn scores_are_deterministic_and_serializable() {
        let (raw, _) = synthesize::<f64>(&SynthSpec::new(40, 25, 5, 3, 9)).unwrap();
        let a = run_filters(&prepare(&raw), &raw, &FilterConfig::default()).unwrap();
        let b = run_filters(&prepare(&raw), &raw, &FilterConfig::default()).unwrap();
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        let back: FilterReport<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn statistic_mode_uses_raw_threshold() {
        let (raw, _) = synthesize::<f64>(&SynthSpec::new(40, 10, 3, 2, 1)).unwrap();
        let cfg = FilterConfig { chi2_mode: ChiSquareMode::Statistic, ..FilterConfig::default() };
        let r = run_filters(&prepare(&raw), &raw, &cfg).unwrap();
        // threshold 0.01 on the statistic admits every non-independent feature
        let res = r.result(FilterMethod::ChiSquare);
        for (s, m) in res.scores.iter().zip(&res.mask) {
            assert_eq!(*m, *s > 0.01);
        }
    }
}
