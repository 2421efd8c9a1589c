//! CART classification tree with Gini impurity.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{argmax, check_dims, Classifier};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 10,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node<F: Scalar> {
    Split {
        feature: usize,
        threshold: F,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DecisionTree<F: Scalar> {
    /// Root at index 0.
    pub nodes: Vec<Node<F>>,
    pub n_features: usize,
    pub n_classes: usize,
    pub config: TreeConfig,
    /// Weighted impurity decrease per feature, unnormalized.
    pub importances: Vec<F>,
}

struct Builder<'a, F: Scalar> {
    x: ArrayView2<'a, F>,
    y: &'a [usize],
    classes: usize,
    cfg: TreeConfig,
    n_try: usize,
    nodes: Vec<Node<F>>,
    importances: Vec<F>,
    features: Vec<usize>,
}

/// `n * gini` from class counts: `n - sum(c^2)/n`.
fn scaled_gini<F: Scalar>(counts: &[usize], n: usize) -> F {
    if n == 0 {
        return F::zero();
    }
    let sq: usize = counts.iter().map(|&c| c * c).sum();
    F::from_count(n) - F::from_count(sq) / F::from_count(n)
}

struct Candidate<F> {
    feature: usize,
    threshold: F,
    impurity: F,
}

impl<F: Scalar> Builder<'_, F> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.classes];
        for &r in rows {
            c[self.y[r]] += 1;
        }
        c
    }

    fn best_for_feature(&self, rows: &[usize], j: usize, total: &[usize]) -> Option<Candidate<F>> {
        let mut pairs: Vec<(F, usize)> = rows.iter().map(|&r| (self.x[[r, j]], self.y[r])).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
        if pairs[0].0 == pairs[pairs.len() - 1].0 {
            return None;
        }
        let n = pairs.len();
        let min_leaf = self.cfg.min_samples_leaf.max(1);
        let mut left = vec![0usize; self.classes];
        let mut right = total.to_vec();
        let mut best: Option<Candidate<F>> = None;
        for i in 0..n - 1 {
            let c = pairs[i].1;
            left[c] += 1;
            right[c] -= 1;
            if pairs[i].0 == pairs[i + 1].0 {
                continue;
            }
            let nl = i + 1;
            if nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let imp = scaled_gini::<F>(&left, nl) + scaled_gini::<F>(&right, n - nl);
            if best.as_ref().is_none_or(|b| imp < b.impurity) {
                best = Some(Candidate {
                    feature: j,
                    threshold: (pairs[i].0 + pairs[i + 1].0) * F::lit(0.5),
                    impurity: imp,
                });
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, rng: &mut Rng) -> usize {
        let counts = self.counts(&rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: counts.clone() });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.cfg.max_depth || rows.len() < self.cfg.min_samples_split.max(2) {
            return id;
        }
        let parent = scaled_gini::<F>(&counts, rows.len());

        // Visit features in a random order and stop after `n_try` of them that
        // vary within the node, continuing past constant ones.
        if self.n_try < self.features.len() {
            self.features.shuffle(rng);
        }
        let mut best: Option<Candidate<F>> = None;
        let mut tried = 0;
        for k in 0..self.features.len() {
            if tried >= self.n_try {
                break;
            }
            let j = self.features[k];
            let Some(c) = self.best_for_feature(&rows, j, &counts) else {
                continue;
            };
            tried += 1;
            if best.as_ref().is_none_or(|b| c.impurity < b.impurity) {
                best = Some(c);
            }
        }
        let Some(best) = best else {
            return id;
        };
        let gain = parent - best.impurity;
        if !(gain > F::epsilon() * F::from_count(rows.len())) {
            return id;
        }
        self.importances[best.feature] += gain;
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.x[[i, best.feature]] <= best.threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }
}

impl<F: Scalar> DecisionTree<F> {
    /// Grows a tree on the given rows of `x` (duplicates allowed, as in a
    /// bootstrap sample).
    pub fn fit(
        x: ArrayView2<'_, F>,
        y: &[usize],
        n_classes: usize,
        rows: Vec<usize>,
        cfg: TreeConfig,
        rng: &mut Rng,
    ) -> Result<Self> {
        let p = x.ncols();
        if rows.is_empty() {
            return Err(Error::Empty("tree training set".into()));
        }
        check_dims(x.nrows(), y.len())?;
        if p == 0 {
            return Err(Error::param("tree needs at least one feature"));
        }
        let n_try = cfg.max_features.unwrap_or(p).clamp(1, p);
        let mut b = Builder {
            x,
            y,
            classes: n_classes,
            cfg,
            n_try,
            nodes: Vec::new(),
            importances: vec![F::zero(); p],
            features: (0..p).collect(),
        };
        b.grow(rows, 0, rng);
        Ok(Self {
            nodes: b.nodes,
            n_features: p,
            n_classes,
            config: cfg,
            importances: b.importances,
        })
    }

    pub fn leaf_counts(&self, x: ArrayView1<'_, F>) -> &[usize] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { counts } => return counts,
                Node::Split { feature, threshold, left, right } => {
                    id = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Majority class of the leaf reached by `x`, ties to the lowest class.
    pub fn vote(&self, x: ArrayView1<'_, F>) -> usize {
        argmax(self.leaf_counts(x))
    }

    pub fn depth(&self) -> usize {
        fn walk<F: Scalar>(nodes: &[Node<F>], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

impl<F: Scalar> Classifier<F> for DecisionTree<F> {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_proba_row(&self, x: ArrayView1<'_, F>) -> Result<Vec<F>> {
        check_dims(self.n_features, x.len())?;
        let counts = self.leaf_counts(x);
        let total = F::from_count(counts.iter().sum());
        Ok(counts.iter().map(|&c| F::from_count(c) / total).collect())
    }
}
