use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::param(format!(
                "train_fraction must lie in (0,1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

fn members_by_class(labels: &[usize], n_classes: usize) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    by_class
}

/// Train and test row indices, each sorted ascending.
pub fn split_indices(
    labels: &[usize],
    n_classes: usize,
    spec: &SplitSpec,
) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    let n = labels.len();
    if n < 2 {
        return Err(Error::dataset("cannot split fewer than 2 samples"));
    }
    let target = ((spec.train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut rng = seed::rng(spec.seed);

    let mut train = Vec::with_capacity(target);
    let mut test = Vec::with_capacity(n - target);
    if !spec.stratified {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..target]);
        test.extend_from_slice(&idx[target..]);
    } else {
        let mut by_class = members_by_class(labels, n_classes);
        if let Some((c, _)) = by_class.iter().enumerate().find(|(_, m)| m.len() == 1) {
            return Err(Error::dataset(format!(
                "class {c} has a single member; stratified split needs at least 2"
            )));
        }
        for members in by_class.iter_mut() {
            members.shuffle(&mut rng);
        }
        let bounds = |m: usize| if m >= 2 { (1, m - 1) } else { (0, 0) };
        let mut quota: Vec<usize> = by_class
            .iter()
            .map(|m| {
                let (lo, hi) = bounds(m.len());
                ((spec.train_fraction * m.len() as f64).round() as usize).clamp(lo, hi)
            })
            .collect();
        // Hit the global size by adjusting the largest class first.
        let mut order: Vec<usize> = (0..n_classes).collect();
        order.sort_by(|&a, &b| by_class[b].len().cmp(&by_class[a].len()).then(a.cmp(&b)));
        let mut assigned: usize = quota.iter().sum();
        for &c in &order {
            if assigned == target {
                break;
            }
            let (lo, hi) = bounds(by_class[c].len());
            if assigned < target {
                let add = (target - assigned).min(hi - quota[c]);
                quota[c] += add;
                assigned += add;
            } else {
                let sub = (assigned - target).min(quota[c] - lo);
                quota[c] -= sub;
                assigned -= sub;
            }
        }
        for (members, &q) in by_class.iter().zip(&quota) {
            train.extend_from_slice(&members[..q]);
            test.extend_from_slice(&members[q..]);
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split<F: Scalar>(data: &Dataset<F>, spec: &SplitSpec) -> Result<(Dataset<F>, Dataset<F>)> {
    let (train, test) = split_indices(data.labels(), data.n_classes(), spec)?;
    Ok((data.select_rows(&train)?, data.select_rows(&test)?))
}

/// Assignment of every sample to one of `k` stratified folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold plan over raw labels.
pub fn make_folds_for_labels(
    labels: &[usize],
    n_classes: usize,
    k: usize,
    seed_value: u64,
) -> Result<FoldPlan> {
    let n = labels.len();
    if k < 2 {
        return Err(Error::param(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds sample count {n}")));
    }
    let mut by_class = members_by_class(labels, n_classes);
    if let Some((c, m)) = by_class
        .iter()
        .enumerate()
        .find(|(_, m)| !m.is_empty() && m.len() < k)
    {
        return Err(Error::dataset(format!(
            "class {c} has {} members, fewer than k = {k}",
            m.len()
        )));
    }
    let mut rng = seed::rng(seed_value);
    let mut assignments = vec![0; n];
    let mut pos = 0usize;
    for members in by_class.iter_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = pos % k;
            pos += 1;
        }
    }
    Ok(FoldPlan { k, assignments })
}

pub fn make_folds<F: Scalar>(data: &Dataset<F>, k: usize, seed_value: u64) -> Result<FoldPlan> {
    make_folds_for_labels(data.labels(), data.n_classes(), k, seed_value)
}
