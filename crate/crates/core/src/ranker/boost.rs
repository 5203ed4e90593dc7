use crate::featurizer::{FeatureVector, QueryGroup};
use crate::metrics::mean_ndcg_of;
use crate::trees::RegressionTree;

use super::TreeEnsemble;

/// Added to Newton leaf denominators so leaves without curvature stay finite.
pub const NEWTON_EPSILON: f64 = 1e-9;

/// A trained ensemble and the per-round curves behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Truncated to the best validation prefix when validation data exists.
    pub ensemble: TreeEnsemble,
    /// Validation mean nDCG@k after `t` trees, `t = 0..=trees_built`. Empty
    /// without validation data.
    pub valid_ndcg: Vec<f64>,
    /// Training curve after `t` trees: mean squared error for MART, mean
    /// nDCG@k for LambdaMART.
    pub train_metric: Vec<f64>,
    pub trees_built: usize,
    /// Set when the labels gave nothing to learn from.
    pub degenerate: bool,
}

/// Training rows of all groups laid end to end.
pub(crate) struct Flat<'a> {
    pub groups: &'a [QueryGroup],
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<u32>,
    /// Start offset of each group in `rows`.
    pub starts: Vec<usize>,
}

impl<'a> Flat<'a> {
    pub fn new(groups: &'a [QueryGroup]) -> Self {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut starts = Vec::with_capacity(groups.len());
        for g in groups {
            starts.push(rows.len());
            for e in &g.entries {
                rows.push(e.features);
                labels.push(e.label);
            }
        }
        Self {
            groups,
            rows,
            labels,
            starts,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn span(&self, g: usize) -> std::ops::Range<usize> {
        let start = self.starts[g];
        start..start + self.groups[g].len()
    }

    pub fn split_scores(&self, flat: &[f64]) -> Vec<Vec<f64>> {
        (0..self.groups.len())
            .map(|g| flat[self.span(g)].to_vec())
            .collect()
    }
}

/// Running validation scores plus best-prefix bookkeeping.
pub(crate) struct Validation<'a> {
    groups: &'a [QueryGroup],
    scores: Vec<Vec<f64>>,
    k: usize,
    patience: usize,
    pub curve: Vec<f64>,
    best_trees: usize,
}

impl<'a> Validation<'a> {
    pub fn new(groups: &'a [QueryGroup], base_score: f64, k: usize, patience: usize) -> Self {
        let scores = groups.iter().map(|g| vec![base_score; g.len()]).collect();
        let mut v = Self {
            groups,
            scores,
            k,
            patience,
            curve: Vec::new(),
            best_trees: 0,
        };
        if !groups.is_empty() {
            let start = v.current();
            v.curve.push(start);
        }
        v
    }

    fn current(&self) -> f64 {
        mean_ndcg_of(self.groups, &self.scores, self.k)
    }

    pub fn enabled(&self) -> bool {
        !self.groups.is_empty()
    }

    /// Adds a tree and returns true once `patience` trees in a row failed
    /// to beat the best prefix.
    pub fn push_tree(&mut self, tree: &RegressionTree, shrinkage: f64) -> bool {
        if !self.enabled() {
            return false;
        }
        for (g, s) in self.groups.iter().zip(&mut self.scores) {
            for (e, score) in g.entries.iter().zip(s.iter_mut()) {
                *score += shrinkage * tree.predict(&e.features);
            }
        }
        let value = self.current();
        let trees = self.curve.len();
        self.curve.push(value);
        if value > self.curve[self.best_trees] {
            self.best_trees = trees;
        }
        trees - self.best_trees >= self.patience
    }

    /// Tree count to keep: the best prefix, or everything when disabled.
    pub fn keep(&self, built: usize) -> usize {
        if self.enabled() {
            self.best_trees
        } else {
            built
        }
    }
}
