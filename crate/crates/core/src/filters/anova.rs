use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One-way ANOVA sums of squares for a single feature. Only groups with at
/// least one member enter `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AnovaDecomposition<F: Scalar> {
    pub group_means: Vec<F>,
    pub group_sizes: Vec<usize>,
    pub overall_mean: F,
    pub k: usize,
    pub total: usize,
    pub between_ss: F,
    pub within_ss: F,
}

impl<F: Scalar> AnovaDecomposition<F> {
    pub fn compute(column: &[F], y: &[usize]) -> Result<Self> {
        if column.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: column.len(),
                got: y.len(),
            });
        }
        let groups = y.iter().max().map_or(0, |m| m + 1);
        let mut sums = vec![F::zero(); groups];
        let mut sizes = vec![0usize; groups];
        for (&v, &g) in column.iter().zip(y) {
            sums[g] += v;
            sizes[g] += 1;
        }
        let k = sizes.iter().filter(|&&s| s > 0).count();
        let total = column.len();
        if k < 2 {
            return Err(Error::param("ANOVA needs at least two non-empty groups"));
        }
        if total <= k {
            return Err(Error::param(format!(
                "ANOVA needs more samples ({total}) than groups ({k})"
            )));
        }
        let overall_mean = column.iter().copied().sum::<F>() / F::from_count(total);
        let group_means: Vec<F> = sums
            .iter()
            .zip(&sizes)
            .map(|(&s, &c)| if c > 0 { s / F::from_count(c) } else { F::zero() })
            .collect();
        let between_ss = group_means
            .iter()
            .zip(&sizes)
            .filter(|(_, &c)| c > 0)
            .map(|(&m, &c)| F::from_count(c) * (m - overall_mean) * (m - overall_mean))
            .sum();
        let within_ss = column
            .iter()
            .zip(y)
            .map(|(&v, &g)| (v - group_means[g]) * (v - group_means[g]))
            .sum();
        Ok(Self {
            group_means,
            group_sizes: sizes,
            overall_mean,
            k,
            total,
            between_ss,
            within_ss,
        })
    }

    /// F statistic; `+inf` when only the within-group term vanishes, 0 when
    /// both vanish.
    pub fn f_statistic(&self) -> F {
        let zero = F::zero();
        if self.within_ss == zero {
            return if self.between_ss > zero { F::infinity() } else { zero };
        }
        let df_between = F::from_count(self.k - 1);
        let df_within = F::from_count(self.total - self.k);
        (self.between_ss / df_between) / (self.within_ss / df_within)
    }
}

pub fn anova_f<F: Scalar>(column: &[F], y: &[usize]) -> Result<F> {
    Ok(AnovaDecomposition::compute(column, y)?.f_statistic())
}
