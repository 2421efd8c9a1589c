//! Aggregates the six selectors into the candidate set the swarm searches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{FilterMethod, FilterReport};
use crate::rfe::RfeTrace;
use crate::scalar::Scalar;

pub const METHOD_NAMES: [&str; 6] = ["MI", "Chi2", "ANOVA", "LASSO", "Variance", "RFE"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PoolMode {
    #[default]
    Union,
    Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoolConfig {
    pub mode: PoolMode,
    /// Upper bound on the pool size; `None` keeps everything.
    pub cap: Option<usize>,
    /// Number of top RFE-ranked features that count as RFE selections.
    pub rfe_keep: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            mode: PoolMode::Union,
            cap: Some(500),
            rfe_keep: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePool {
    /// Original feature ids, strictly increasing.
    pub candidate_indices: Vec<usize>,
    /// `membership[m][k]`: method `m` selected candidate `k`.
    pub membership: Vec<Vec<bool>>,
    pub method_names: Vec<String>,
    /// Size of the aggregate before the cap was applied.
    pub uncapped_size: usize,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.candidate_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidate_indices.is_empty()
    }

    /// Number of methods that selected each candidate.
    pub fn votes(&self) -> Vec<usize> {
        (0..self.len())
            .map(|k| self.membership.iter().filter(|row| row[k]).count())
            .collect()
    }
}

/// Builds the pool from per-method masks over `p` features, given in
/// [`METHOD_NAMES`] order. `tie_scores` orders equal-vote features when the
/// cap applies (higher first, then lower index).
pub fn pool_from_masks(masks: &[Vec<bool>; 6], tie_scores: &[f64], cfg: &PoolConfig) -> Result<CandidatePool> {
    let p = masks[0].len();
    if masks.iter().any(|m| m.len() != p) || tie_scores.len() != p {
        return Err(Error::param("selector outputs disagree on the feature count"));
    }
    let votes: Vec<usize> = (0..p).map(|j| masks.iter().filter(|m| m[j]).count()).collect();
    let mut chosen: Vec<usize> = (0..p)
        .filter(|&j| match cfg.mode {
            PoolMode::Union => votes[j] > 0,
            PoolMode::Intersection => votes[j] == masks.len(),
        })
        .collect();
    if chosen.is_empty() {
        return Err(Error::Empty(
            "candidate pool: the selectors kept no features; loosen the thresholds".into(),
        ));
    }
    let uncapped_size = chosen.len();
    if let Some(cap) = cfg.cap {
        if cap == 0 {
            return Err(Error::param("pool cap must be positive"));
        }
        if chosen.len() > cap {
            chosen.sort_by(|&a, &b| {
                votes[b]
                    .cmp(&votes[a])
                    .then(tie_scores[b].partial_cmp(&tie_scores[a]).unwrap_or(std::cmp::Ordering::Equal))
                    .then(a.cmp(&b))
            });
            chosen.truncate(cap);
            chosen.sort_unstable();
        }
    }
    Ok(CandidatePool {
        membership: masks
            .iter()
            .map(|m| chosen.iter().map(|&j| m[j]).collect())
            .collect(),
        candidate_indices: chosen,
        method_names: METHOD_NAMES.iter().map(|s| s.to_string()).collect(),
        uncapped_size,
    })
}

pub fn build_pool<F: Scalar>(report: &FilterReport<F>, rfe: &RfeTrace<F>, cfg: &PoolConfig) -> Result<CandidatePool> {
    let p = report.n_features();
    if rfe.final_ranking.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: rfe.final_ranking.len(),
        });
    }
    let mut rfe_mask = vec![false; p];
    for &j in rfe.top(cfg.rfe_keep) {
        rfe_mask[j] = true;
    }
    let masks = [
        report.mask(FilterMethod::MutualInformation).to_vec(),
        report.mask(FilterMethod::ChiSquare).to_vec(),
        report.mask(FilterMethod::Anova).to_vec(),
        report.mask(FilterMethod::Lasso).to_vec(),
        report.mask(FilterMethod::Variance).to_vec(),
        rfe_mask,
    ];
    let mi: Vec<f64> = report
        .scores(FilterMethod::MutualInformation)
        .iter()
        .map(|v| v.as_f64())
        .collect();
    pool_from_masks(&masks, &mi, cfg)
}
