//! Second-order gradient boosting on the logistic loss, one tree sequence per
//! class (one-vs-rest).

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_dims, Classifier};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::{sigmoid, Scalar};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub subsample: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub min_child_weight: f64,
    /// Initial log-odds for every class; `None` uses the class prior.
    pub base_score: Option<f64>,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            n_rounds: 100,
            learning_rate: 0.1,
            max_depth: 6,
            subsample: 0.8,
            gamma: 0.3,
            lambda: 1.0,
            min_child_weight: 1.0,
            base_score: None,
        }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::param("learning_rate must lie in (0,1]"));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::param("subsample must lie in (0,1]"));
        }
        if !(self.gamma >= 0.0 && self.lambda >= 0.0 && self.min_child_weight >= 0.0) {
            return Err(Error::param("gamma, lambda and min_child_weight must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegNode<F: Scalar> {
    Split {
        feature: usize,
        threshold: F,
        left: usize,
        right: usize,
    },
    /// `weight = -grad_sum / (hess_sum + lambda)`, before shrinkage.
    Leaf { weight: F, grad_sum: F, hess_sum: F },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RegressionTree<F: Scalar> {
    pub nodes: Vec<RegNode<F>>,
}

impl<F: Scalar> RegressionTree<F> {
    pub fn predict(&self, x: ArrayView1<'_, F>) -> F {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                RegNode::Leaf { weight, .. } => return *weight,
                RegNode::Split { feature, threshold, left, right } => {
                    id = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = (F, F, F)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            RegNode::Leaf { weight, grad_sum, hess_sum } => Some((*weight, *grad_sum, *hess_sum)),
            RegNode::Split { .. } => None,
        })
    }
}

/// The boosted sequence for one class against the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BoostedClass<F: Scalar> {
    pub base_score: F,
    pub trees: Vec<RegressionTree<F>>,
    /// Mean training logistic loss before the first round and after each one.
    pub loss_history: Vec<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GbtModel<F: Scalar> {
    pub classes: Vec<BoostedClass<F>>,
    pub learning_rate: F,
    pub lambda: F,
    pub n_features: usize,
    pub config: GbtConfig,
}

struct Grower<'a, F: Scalar> {
    x: ArrayView2<'a, F>,
    /// Row order of every feature, ascending by value.
    sorted: &'a [Vec<usize>],
    g: &'a [F],
    h: &'a [F],
    lambda: F,
    gamma: F,
    min_child_weight: F,
    max_depth: usize,
    member: Vec<bool>,
    nodes: Vec<RegNode<F>>,
}

impl<F: Scalar> Grower<'_, F> {
    fn score(&self, g: F, h: F) -> F {
        g * g / (h + self.lambda)
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let gs: F = rows.iter().map(|&i| self.g[i]).sum();
        let hs: F = rows.iter().map(|&i| self.h[i]).sum();
        let id = self.nodes.len();
        self.nodes.push(RegNode::Leaf {
            weight: -gs / (hs + self.lambda),
            grad_sum: gs,
            hess_sum: hs,
        });
        if depth >= self.max_depth || rows.len() < 2 {
            return id;
        }
        for &i in &rows {
            self.member[i] = true;
        }
        let parent = self.score(gs, hs);
        let half = F::lit(0.5);
        let mut best: Option<(F, usize, F)> = None;
        for (j, order) in self.sorted.iter().enumerate() {
            let (mut gl, mut hl) = (F::zero(), F::zero());
            let mut prev: Option<usize> = None;
            for &i in order {
                if !self.member[i] {
                    continue;
                }
                if let Some(pi) = prev {
                    let (a, b) = (self.x[[pi, j]], self.x[[i, j]]);
                    let hr = hs - hl;
                    if a < b && hl >= self.min_child_weight && hr >= self.min_child_weight {
                        let gain = half * (self.score(gl, hl) + self.score(gs - gl, hr) - parent) - self.gamma;
                        if best.is_none_or(|(bg, _, _)| gain > bg) {
                            best = Some((gain, j, (a + b) * half));
                        }
                    }
                }
                gl += self.g[i];
                hl += self.h[i];
                prev = Some(i);
            }
        }
        for &i in &rows {
            self.member[i] = false;
        }
        let Some((gain, feature, threshold)) = best else {
            return id;
        };
        if !(gain > F::zero()) {
            return id;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[[i, feature]] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = RegNode::Split { feature, threshold, left, right };
        id
    }
}

fn mean_logloss<F: Scalar>(scores: &[F], y: &[F]) -> F {
    // log(1 + e^s) - y*s, computed stably
    let total: F = scores
        .iter()
        .zip(y)
        .map(|(&s, &t)| s.max(F::zero()) + (-s.abs()).exp().ln_1p() - t * s)
        .sum();
    total / F::from_count(scores.len())
}

pub fn train_gbt<F: Scalar>(train: &Dataset<F>, cfg: &GbtConfig, seed_value: u64) -> Result<GbtModel<F>> {
    cfg.validate()?;
    let x = train.features().view();
    let (n, p) = x.dim();
    let counts = train.class_counts();
    if let Some(c) = counts.iter().position(|&k| k == 0) {
        return Err(Error::dataset(format!("class {c} has no training samples")));
    }
    let mut sorted: Vec<Vec<usize>> = Vec::with_capacity(p);
    for j in 0..p {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| x[[a, j]].partial_cmp(&x[[b, j]]).expect("finite features"));
        sorted.push(order);
    }
    let eta = F::lit(cfg.learning_rate);
    let lambda = F::lit(cfg.lambda);
    let n_sub = ((cfg.subsample * n as f64).round() as usize).clamp(1, n);

    let classes = (0..counts.len())
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::rng(seed::derive(seed_value, c as u64));
            let y: Vec<F> = train.labels().iter().map(|&l| if l == c { F::one() } else { F::zero() }).collect();
            let base = match cfg.base_score {
                Some(b) => F::lit(b),
                None => {
                    let prior = F::from_count(counts[c]) / F::from_count(n);
                    (prior / (F::one() - prior)).ln()
                }
            };
            let mut scores = vec![base; n];
            let mut loss_history = vec![mean_logloss(&scores, &y)];
            let mut trees = Vec::with_capacity(cfg.n_rounds);
            let mut g = vec![F::zero(); n];
            let mut h = vec![F::zero(); n];
            for _ in 0..cfg.n_rounds {
                for i in 0..n {
                    let pr = sigmoid(scores[i]);
                    g[i] = pr - y[i];
                    h[i] = pr * (F::one() - pr);
                }
                let mut rows: Vec<usize> = if n_sub < n {
                    index::sample(&mut rng, n, n_sub).into_vec()
                } else {
                    (0..n).collect()
                };
                rows.sort_unstable();
                let mut grower = Grower {
                    x,
                    sorted: &sorted,
                    g: &g,
                    h: &h,
                    lambda,
                    gamma: F::lit(cfg.gamma),
                    min_child_weight: F::lit(cfg.min_child_weight),
                    max_depth: cfg.max_depth,
                    member: vec![false; n],
                    nodes: Vec::new(),
                };
                grower.grow(rows, 0);
                let tree = RegressionTree { nodes: grower.nodes };
                for (i, s) in scores.iter_mut().enumerate() {
                    *s += eta * tree.predict(x.row(i));
                }
                loss_history.push(mean_logloss(&scores, &y));
                trees.push(tree);
            }
            BoostedClass { base_score: base, trees, loss_history }
        })
        .collect();
    Ok(GbtModel {
        classes,
        learning_rate: eta,
        lambda,
        n_features: p,
        config: *cfg,
    })
}

impl<F: Scalar> GbtModel<F> {
    /// Raw additive score per class: `base + eta * sum of tree outputs`.
    pub fn class_scores(&self, x: ArrayView1<'_, F>) -> Result<Vec<F>> {
        check_dims(self.n_features, x.len())?;
        Ok(self
            .classes
            .iter()
            .map(|bc| bc.base_score + self.learning_rate * bc.trees.iter().map(|t| t.predict(x)).sum::<F>())
            .collect())
    }
}

impl<F: Scalar> Classifier<F> for GbtModel<F> {
    fn n_classes(&self) -> usize {
        self.classes.len()
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    /// Per-class sigmoid probabilities, renormalized to sum to 1.
    fn predict_proba_row(&self, x: ArrayView1<'_, F>) -> Result<Vec<F>> {
        let s: Vec<F> = self.class_scores(x)?.into_iter().map(sigmoid).collect();
        let total: F = s.iter().copied().sum();
        Ok(s.into_iter().map(|v| v / total).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synthesize, SynthSpec};
    use crate::learners::accuracy;
    use ndarray::array;

    fn tiny() -> Dataset<f64> {
        Dataset::new(
            array![[0.0], [1.0], [2.0], [3.0]],
            vec![0, 1, 1, 1],
            vec!["a".into()],
            vec!["n".into(), "p".into()],
        )
        .unwrap()
    }

    #[test]
    fn single_leaf_weight_by_hand() {
        let cfg = GbtConfig { n_rounds: 1, max_depth: 0, subsample: 1.0, ..GbtConfig::default() };
        let m = train_gbt(&tiny(), &cfg, 0).unwrap();
        // class 1: prior 3/4, so every p = 0.75; g = 0.75 - y, h = 0.1875
        let g: f64 = 0.75 - 0.0 + 3.0 * (0.75 - 1.0);
        let h: f64 = 4.0 * 0.75 * 0.25;
        let tree = &m.classes[1].trees[0];
        assert_eq!(tree.nodes.len(), 1);
        let (w, gs, hs) = tree.leaves().next().unwrap();
        assert!((gs - g).abs() < 1e-12 && (hs - h).abs() < 1e-12);
        assert!((w + g / (h + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn huge_gamma_keeps_priors() {
        let (d, _) = synthesize::<f64>(&SynthSpec::new(40, 6, 3, 3, 2)).unwrap();
        let cfg = GbtConfig { gamma: 1e9, n_rounds: 0, ..GbtConfig::default() };
        let m = train_gbt(&d, &cfg, 0).unwrap();
        let counts = d.class_counts();
        let p = m.predict_proba_row(d.features().row(0)).unwrap();
        for (pc, &k) in p.iter().zip(&counts) {
            assert!((pc - k as f64 / 40.0).abs() < 1e-12);
        }
        let cfg = GbtConfig { gamma: 1e9, n_rounds: 5, ..GbtConfig::default() };
        let m = train_gbt(&d, &cfg, 0).unwrap();
        assert!(m.classes.iter().all(|bc| bc.trees.iter().all(|t| t.nodes.len() == 1)));
    }

    #[test]
    fn loss_descends_without_subsampling() {
        for s in 0..3 {
            let (d, _) = synthesize::<f64>(&SynthSpec::new(50, 10, 4, 3, s)).unwrap();
            let cfg = GbtConfig { subsample: 1.0, ..GbtConfig::default() };
            let m = train_gbt(&d, &cfg, s).unwrap();
            for bc in &m.classes {
                assert_eq!(bc.loss_history.len(), 101);
                for w in bc.loss_history.windows(2) {
                    assert!(w[1] <= w[0] + 1e-12, "{} > {}", w[1], w[0]);
                }
            }
            let acc = accuracy(d.labels(), &m.predict(d.features()).unwrap());
            assert!(acc > 0.9);
        }
    }

    #[test]
    fn zero_tree_is_identity_and_probs_normalize() {
        let (d, _) = synthesize::<f64>(&SynthSpec::new(30, 5, 2, 2, 7)).unwrap();
        let mut m = train_gbt(&d, &GbtConfig { n_rounds: 10, ..GbtConfig::default() }, 1).unwrap();
        let before = m.predict_proba(d.features()).unwrap();
        m.classes[0].trees.push(RegressionTree {
            nodes: vec![RegNode::Leaf { weight: 0.0, grad_sum: 0.0, hess_sum: 0.0 }],
        });
        assert_eq!(m.predict_proba(d.features()).unwrap(), before);
        for p in before {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_class_rejected() {
        let d = tiny().with_labels(vec![0, 0, 0, 0]).unwrap();
        assert!(train_gbt(&d, &GbtConfig::default(), 0).is_err());
    }
}
