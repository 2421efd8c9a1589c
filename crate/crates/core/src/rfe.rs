//! Recursive feature elimination driven by random-forest importances.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{train_forest, ForestConfig};
use crate::scalar::Scalar;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfeConfig {
    pub iterations: usize,
    pub target_count: usize,
    pub forest: ForestConfig,
    pub seed: u64,
    /// Remove a fixed number of features per round instead of spreading the
    /// removals over `iterations` rounds.
    pub step: Option<usize>,
}

impl Default for RfeConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            target_count: 50,
            forest: ForestConfig::default(),
            seed: 0,
            step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RfeRound<F: Scalar> {
    /// Original indices of the features the estimator saw this round.
    pub survivors: Vec<usize>,
    /// Normalized importances aligned with `survivors`.
    pub importances: Vec<F>,
    pub eliminated: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RfeTrace<F: Scalar> {
    pub rounds: Vec<RfeRound<F>>,
    /// Every original index once; rank 0 is the most important.
    pub final_ranking: Vec<usize>,
    pub selected: Vec<usize>,
}

impl<F: Scalar> RfeTrace<F> {
    pub fn top(&self, k: usize) -> &[usize] {
        &self.final_ranking[..k.min(self.final_ranking.len())]
    }
}

/// Survivor positions ordered from least to most important, ties by the
/// lower original index first.
fn ascending(survivors: &[usize], imp: &[f64]) -> Vec<usize> {
    let mut pos: Vec<usize> = (0..survivors.len()).collect();
    pos.sort_by(|&a, &b| {
        imp[a]
            .partial_cmp(&imp[b])
            .expect("finite importances")
            .then(survivors[a].cmp(&survivors[b]))
    });
    pos
}

pub fn rfe_select<F: Scalar>(train: &Dataset<F>, cfg: &RfeConfig) -> Result<RfeTrace<F>> {
    let p = train.n_features();
    if cfg.iterations == 0 {
        return Err(Error::param("RFE needs at least one iteration"));
    }
    if cfg.target_count == 0 || cfg.target_count > p {
        return Err(Error::param(format!(
            "RFE target {} must lie in 1..={p}",
            cfg.target_count
        )));
    }
    if cfg.step == Some(0) {
        return Err(Error::param("RFE step must be positive"));
    }
    let target = cfg.target_count;
    let mut survivors: Vec<usize> = (0..p).collect();
    let mut rounds = Vec::new();
    let mut eliminated_order: Vec<usize> = Vec::with_capacity(p - target);
    let mut r = 0usize;
    let last_importance = loop {
        let view = train.select_features(&survivors)?;
        let forest = train_forest(&view, &cfg.forest, seed::derive(cfg.seed, r as u64))?;
        let imp = forest.importances();
        let imp64: Vec<f64> = imp.iter().map(|v| v.as_f64()).collect();
        let cur = survivors.len();
        let k = match cfg.step {
            _ if cur <= target => 0,
            Some(step) => step.min(cur - target),
            None => (cur - target).div_ceil(cfg.iterations - r),
        };
        let order = ascending(&survivors, &imp64);
        let drop: Vec<usize> = order[..k].iter().map(|&i| survivors[i]).collect();
        eliminated_order.extend_from_slice(&drop);
        rounds.push(RfeRound {
            survivors: survivors.clone(),
            importances: imp,
            eliminated: drop,
        });
        r += 1;
        if k == 0 {
            break imp64;
        }
        let mut next: Vec<(usize, f64)> = order[k..].iter().map(|&i| (survivors[i], imp64[i])).collect();
        next.sort_by_key(|t| t.0);
        survivors = next.iter().map(|t| t.0).collect();
        if survivors.len() == target {
            break next.into_iter().map(|t| t.1).collect();
        }
    };
    let mut ranking: Vec<usize> = ascending(&survivors, &last_importance)
        .into_iter()
        .rev()
        .map(|i| survivors[i])
        .collect();
    // later eliminations rank higher
    ranking.extend(eliminated_order.iter().rev());
    Ok(RfeTrace {
        rounds,
        final_ranking: ranking,
        selected: survivors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize, SynthSpec};

    fn small_forest() -> ForestConfig {
        ForestConfig { n_trees: 20, ..ForestConfig::default() }
    }

    fn is_permutation(r: &[usize], p: usize) -> bool {
        let mut s = r.to_vec();
        s.sort_unstable();
        s == (0..p).collect::<Vec<_>>()
    }

    #[test]
    fn schedule_removes_one_per_round() {
        let (d, _) = synthesize::<f64>(&SynthSpec::new(30, 20, 3, 2, 1)).unwrap();
        let cfg = RfeConfig { target_count: 10, forest: small_forest(), ..RfeConfig::default() };
        let t = rfe_select(&d, &cfg).unwrap();
        assert_eq!(t.rounds.len(), 10);
        for (i, round) in t.rounds.iter().enumerate() {
            assert_eq!(round.survivors.len(), 20 - i);
            assert_eq!(round.eliminated.len(), 1);
        }
        assert_eq!(t.selected.len(), 10);
        assert!(is_permutation(&t.final_ranking, 20));
    }

    #[test]
    fn target_equal_to_p_is_a_single_noop_round() {
        let (d, _) = synthesize::<f64>(&SynthSpec::new(30, 8, 3, 2, 2)).unwrap();
        let cfg = RfeConfig { target_count: 8, forest: small_forest(), ..RfeConfig::default() };
        let t = rfe_select(&d, &cfg).unwrap();
        assert_eq!(t.rounds.len(), 1);
        assert!(t.rounds[0].eliminated.is_empty());
        let imp = &t.rounds[0].importances;
        for w in t.final_ranking.windows(2) {
            assert!(imp[w[0]] >= imp[w[1]]);
        }
        assert!(rfe_select(&d, &RfeConfig { target_count: 9, ..cfg }).is_err());
    }

    #[test]
    fn geometric_schedule_hits_target_and_survival_is_monotone() {
        let (d, _) = synthesize::<f64>(&SynthSpec::new(30, 137, 5, 3, 3)).unwrap();
        let cfg = RfeConfig { target_count: 12, forest: small_forest(), seed: 4, ..RfeConfig::default() };
        let t = rfe_select(&d, &cfg).unwrap();
        assert_eq!(t.rounds.len(), 10);
        assert_eq!(t.selected.len(), 12);
        for w in t.rounds.windows(2) {
            assert!(w[1].survivors.len() < w[0].survivors.len());
            for e in &w[0].eliminated {
                assert!(!w[1].survivors.contains(e));
            }
        }
        assert!(is_permutation(&t.final_ranking, 137));
        assert_eq!(rfe_select(&d, &cfg).unwrap(), t);
    }

    #[test]
    fn step_mode() {
        let (d, _) = synthesize::<f64>(&SynthSpec::new(30, 40, 5, 2, 5)).unwrap();
        let cfg = RfeConfig { target_count: 15, step: Some(10), forest: small_forest(), ..RfeConfig::default() };
        let t = rfe_select(&d, &cfg).unwrap();
        let sizes: Vec<usize> = t.rounds.iter().map(|r| r.survivors.len()).collect();
        assert_eq!(sizes, vec![40, 30, 20]);
        assert_eq!(t.selected.len(), 15);
    }
}
