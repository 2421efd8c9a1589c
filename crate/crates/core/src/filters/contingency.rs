//! Discretization plus the two count-based scorers: mutual information and
//! Pearson's chi-square.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Equal-width binning over `[min, max]`; the maximum lands in the top bin and
/// a constant column maps entirely to bin 0.
pub fn discretize<F: Scalar>(column: &[F], bins: usize) -> Vec<usize> {
    let bins = bins.max(1);
    let (lo, hi) = column
        .iter()
        .fold((F::infinity(), F::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if column.is_empty() || !(hi > lo) {
        return vec![0; column.len()];
    }
    let width = hi - lo;
    let nb = F::from_count(bins);
    column
        .iter()
        .map(|&v| {
            let b = ((v - lo) / width * nb).floor().to_usize().unwrap_or(0);
            b.min(bins - 1)
        })
        .collect()
}

/// Observed counts for two discrete variables, with the derived expected
/// counts and empirical joint/marginal probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable<F: Scalar> {
    pub observed: Array2<usize>,
    pub expected: Array2<F>,
    pub joint: Array2<F>,
    pub row_marginal: Vec<F>,
    pub col_marginal: Vec<F>,
    pub total: usize,
}

impl<F: Scalar> ContingencyTable<F> {
    /// Table of shape `rows x cols`; codes must be below those bounds.
    pub fn from_codes(x: &[usize], y: &[usize], rows: usize, cols: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::param("contingency table needs at least one sample"));
        }
        let mut observed = Array2::<usize>::zeros((rows, cols));
        for (&a, &b) in x.iter().zip(y) {
            if a >= rows || b >= cols {
                return Err(Error::param(format!(
                    "code ({a}, {b}) outside a {rows}x{cols} table"
                )));
            }
            observed[[a, b]] += 1;
        }
        Ok(Self::from_observed(observed))
    }

    /// Table sized by the largest code seen in each variable.
    pub fn from_pairs(x: &[usize], y: &[usize]) -> Result<Self> {
        let rows = x.iter().max().map_or(0, |m| m + 1);
        let cols = y.iter().max().map_or(0, |m| m + 1);
        Self::from_codes(x, y, rows, cols)
    }

    pub fn from_observed(observed: Array2<usize>) -> Self {
        let (rows, cols) = observed.dim();
        let total: usize = observed.iter().sum();
        let n = F::from_count(total.max(1));
        let row_tot: Vec<usize> = (0..rows).map(|r| observed.row(r).sum()).collect();
        let col_tot: Vec<usize> = (0..cols).map(|c| observed.column(c).sum()).collect();
        let expected = Array2::from_shape_fn((rows, cols), |(r, c)| {
            F::from_count(row_tot[r]) * F::from_count(col_tot[c]) / n
        });
        let joint = observed.mapv(|o| F::from_count(o) / n);
        Self {
            expected,
            joint,
            row_marginal: row_tot.iter().map(|&t| F::from_count(t) / n).collect(),
            col_marginal: col_tot.iter().map(|&t| F::from_count(t) / n).collect(),
            observed,
            total,
        }
    }

    /// Rows and columns that hold at least one observation.
    pub fn occupied_shape(&self) -> (usize, usize) {
        let r = (0..self.observed.nrows()).filter(|&r| self.observed.row(r).sum() > 0).count();
        let c = (0..self.observed.ncols()).filter(|&c| self.observed.column(c).sum() > 0).count();
        (r, c)
    }

    /// Degrees of freedom of the independence test over occupied cells.
    pub fn dof(&self) -> usize {
        let (r, c) = self.occupied_shape();
        r.saturating_sub(1) * c.saturating_sub(1)
    }

    /// Mutual information in nats.
    pub fn mutual_information(&self) -> F {
        let n = F::from_count(self.total);
        let mut mi = F::zero();
        for ((r, c), &o) in self.observed.indexed_iter() {
            if o == 0 {
                continue;
            }
            let pxy = F::from_count(o) / n;
            mi += pxy * (pxy / (self.row_marginal[r] * self.col_marginal[c])).ln();
        }
        mi.max(F::zero())
    }

    /// Sum of (O - E)^2 / E over cells with E > 0.
    pub fn chi_square(&self) -> F {
        let mut stat = F::zero();
        for (&o, &e) in self.observed.iter().zip(self.expected.iter()) {
            if e > F::zero() {
                let d = F::from_count(o) - e;
                stat += d * d / e;
            }
        }
        stat
    }
}

pub fn mutual_information<F: Scalar>(x_bins: &[usize], y: &[usize]) -> Result<F> {
    Ok(ContingencyTable::<F>::from_pairs(x_bins, y)?.mutual_information())
}

pub fn chi_square<F: Scalar>(x_bins: &[usize], y: &[usize]) -> Result<F> {
    Ok(ContingencyTable::<F>::from_pairs(x_bins, y)?.chi_square())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn discretize_examples() {
        assert_eq!(discretize(&[0.0, 1.0, 2.0, 3.0], 2), vec![0, 0, 1, 1]);
        assert_eq!(discretize(&[4.0f32; 5], 10), vec![0; 5]);
        assert_eq!(discretize(&[-1.0, 1.0], 10), vec![0, 9]);
    }

    #[test]
    fn mi_examples() {
        let y = [0, 1, 0, 1, 1, 0];
        assert_eq!(mutual_information::<f64>(&[0; 6], &y).unwrap(), 0.0);
        let mi: f64 = mutual_information(&y, &y).unwrap();
        assert!((mi - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(mutual_information::<f64>(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn mi_two_by_two_literal() {
        // counts [[2,1],[1,2]]: p(x,y) in {1/3, 1/6}, marginals 1/2
        let t = ContingencyTable::<f64>::from_observed(array![[2, 1], [1, 2]]);
        let want = 2.0 * (1.0 / 3.0) * ((1.0 / 3.0) / 0.25f64).ln()
            + 2.0 * (1.0 / 6.0) * ((1.0 / 6.0) / 0.25f64).ln();
        assert!((t.mutual_information() - want).abs() < 1e-12);
    }

    #[test]
    fn chi_square_examples() {
        let diag = ContingencyTable::<f64>::from_observed(array![[10, 0], [0, 10]]);
        assert!((diag.chi_square() - 20.0).abs() < 1e-12);
        let indep = ContingencyTable::<f64>::from_observed(array![[2, 4], [3, 6]]);
        assert!(indep.chi_square().abs() < 1e-12);
        assert_eq!(diag.dof(), 1);
    }

    proptest! {
        #[test]
        fn discretize_range_contract(v in proptest::collection::vec(-1e3f64..1e3, 1..50), bins in 2usize..12) {
            let b = discretize(&v, bins);
            prop_assert_eq!(b.len(), v.len());
            prop_assert!(b.iter().all(|&x| x < bins));
        }

        #[test]
        fn mi_nonnegative_and_symmetric(pairs in proptest::collection::vec((0usize..5, 0usize..4), 1..60)) {
            let (x, y): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let a: f64 = mutual_information(&x, &y).unwrap();
            let b: f64 = mutual_information(&y, &x).unwrap();
            prop_assert!(a >= -1e-12);
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn chi_square_invariant_to_bin_relabeling(pairs in proptest::collection::vec((0usize..5, 0usize..3), 2..60)) {
            let (x, y): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let relabel = [3usize, 0, 4, 1, 2];
            let xr: Vec<usize> = x.iter().map(|&b| relabel[b]).collect();
            let a: f64 = chi_square(&x, &y).unwrap();
            let b: f64 = chi_square(&xr, &y).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn table_invariants(pairs in proptest::collection::vec((0usize..6, 0usize..4), 1..80)) {
            let (x, y): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let t = ContingencyTable::<f64>::from_pairs(&x, &y).unwrap();
            prop_assert_eq!(t.observed.iter().sum::<usize>(), x.len());
            prop_assert!((t.joint.sum() - 1.0).abs() < 1e-12);
            for r in 0..t.observed.nrows() {
                prop_assert!((t.expected.row(r).sum() - t.observed.row(r).sum() as f64).abs() < 1e-9);
            }
            for c in 0..t.observed.ncols() {
                prop_assert!((t.expected.column(c).sum() - t.observed.column(c).sum() as f64).abs() < 1e-9);
            }
        }
    }
}
