use crate::error::{Error, Result};

/// Area under the ROC curve for one positive class via the Mann-Whitney
/// statistic with midranks for ties.
pub fn binary_auc(positive: &[bool], scores: &[f64]) -> Result<f64> {
    if positive.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: positive.len(),
            got: scores.len(),
        });
    }
    let n_pos = positive.iter().filter(|&&b| b).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::param("AUC needs both positive and negative samples"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numerical("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if positive[k] {
                rank_sum += mid;
            }
        }
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Macro one-vs-rest AUC over the classes present in `truth`.
/// `probabilities[i][c]` scores sample `i` for class `c`.
pub fn roc_auc(truth: &[usize], probabilities: &[Vec<f64>]) -> Result<f64> {
    if truth.len() != probabilities.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: probabilities.len(),
        });
    }
    let n_classes = probabilities.first().map_or(0, Vec::len);
    let mut present: Vec<usize> = truth.to_vec();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        return Err(Error::param("AUC is undefined when the truth holds a single class"));
    }
    let mut total = 0.0;
    for &c in &present {
        if c >= n_classes {
            return Err(Error::param(format!("class {c} has no probability column")));
        }
        let pos: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        let scores: Vec<f64> = probabilities.iter().map(|p| p[c]).collect();
        total += binary_auc(&pos, &scores)?;
    }
    Ok(total / present.len() as f64)
}

/// ROC curve points `(false positive rate, true positive rate)` from the
/// strictest threshold to the loosest, tied scores collapsed into one step.
pub fn roc_points(positive: &[bool], scores: &[f64]) -> Vec<(f64, f64)> {
    let n_pos = positive.iter().filter(|&&b| b).count().max(1) as f64;
    let n_neg = (positive.len() - positive.iter().filter(|&&b| b).count()).max(1) as f64;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    for (k, &i) in order.iter().enumerate() {
        if positive[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_tie = order.get(k + 1).is_none_or(|&nx| scores[nx] != scores[i]);
        if last_of_tie {
            points.push((fp as f64 / n_neg, tp as f64 / n_pos));
        }
    }
    points
}
