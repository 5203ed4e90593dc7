//! Least-squares regression trees grown best-first to a leaf budget.
//!
//! Growth repeatedly splits the leaf whose best split yields the largest
//! weighted variance reduction. Every feature is scanned; candidate
//! thresholds are midpoints between consecutive distinct values. Ties go
//! to the lowest feature index, then the lowest threshold, then the
//! earliest created leaf.

use serde::{Deserialize, Serialize};

use crate::featurizer::{FeatureVector, NUM_FEATURES};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Array-backed binary tree rooted at node 0. Children always sit at
/// larger indices than their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Node>", into = "Vec<Node>")]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl TryFrom<Vec<Node>> for RegressionTree {
    type Error = String;

    fn try_from(nodes: Vec<Node>) -> std::result::Result<Self, String> {
        if nodes.is_empty() {
            return Err("tree without nodes".into());
        }
        let mut parents = vec![0usize; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= NUM_FEATURES {
                        return Err(format!("node {i}: feature index {feature} out of range"));
                    }
                    if threshold.is_nan() {
                        return Err(format!("node {i}: NaN threshold"));
                    }
                    for child in [left, right] {
                        if child <= i || child >= nodes.len() {
                            return Err(format!("node {i}: invalid child {child}"));
                        }
                        parents[child] += 1;
                    }
                }
                Node::Leaf { value } if !value.is_finite() => {
                    return Err(format!("node {i}: non-finite leaf value"));
                }
                Node::Leaf { .. } => {}
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err("every non-root node needs exactly one parent".into());
        }
        Ok(Self { nodes })
    }
}

impl From<RegressionTree> for Vec<Node> {
    fn from(t: RegressionTree) -> Self {
        t.nodes
    }
}

impl RegressionTree {
    pub fn constant(value: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Index of the leaf `v` is routed to (`value <= threshold` goes left).
    pub fn leaf_index(&self, v: &FeatureVector) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if v[feature] <= threshold { left } else { right },
                Node::Leaf { .. } => return at,
            }
        }
    }

    pub fn predict(&self, v: &FeatureVector) -> f64 {
        match self.nodes[self.leaf_index(v)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    /// Overwrites a leaf's output; non-leaf indices are ignored.
    pub fn set_leaf_value(&mut self, node: usize, value: f64) {
        if let Some(Node::Leaf { value: v }) = self.nodes.get_mut(node) {
            *v = value;
        }
    }

    /// True for a single leaf with output zero: adding it changes nothing.
    pub fn is_null(&self) -> bool {
        matches!(self.nodes.as_slice(), [Node::Leaf { value }] if *value == 0.0)
    }
}

pub fn tree_predict(t: &RegressionTree, v: &FeatureVector) -> f64 {
    t.predict(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_leaves: 10,
            min_samples_leaf: 1,
        }
    }
}

/// A fitted tree plus the leaf each training row landed in.
#[derive(Debug, Clone)]
pub struct TreeFit {
    pub tree: RegressionTree,
    pub row_leaf: Vec<usize>,
}

pub fn fit_regression_tree(
    rows: &[FeatureVector],
    targets: &[f64],
    weights: Option<&[f64]>,
    params: TreeParams,
) -> Result<RegressionTree> {
    grow(rows, targets, weights, params).map(|f| f.tree)
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

struct Frontier {
    node: usize,
    rows: Vec<usize>,
    best: Option<Split>,
}

struct Sample<'a> {
    rows: &'a [FeatureVector],
    targets: &'a [f64],
    weights: Option<&'a [f64]>,
    min_leaf: usize,
}

impl Sample<'_> {
    fn w(&self, i: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[i])
    }

    fn leaf_value(&self, idx: &[usize]) -> f64 {
        let first = self.targets[idx[0]];
        if idx.iter().all(|&i| self.targets[i] == first) {
            return first;
        }
        let (sw, swy) = idx.iter().fold((0.0, 0.0), |(sw, swy), &i| {
            (sw + self.w(i), swy + self.w(i) * self.targets[i])
        });
        if sw > 0.0 {
            swy / sw
        } else {
            0.0
        }
    }

    fn best_split(&self, idx: &[usize]) -> Option<Split> {
        let n = idx.len();
        if n < 2 * self.min_leaf.max(1) {
            return None;
        }
        let first = self.targets[idx[0]];
        if idx.iter().all(|&i| self.targets[i] == first) {
            return None;
        }
        let total_w: f64 = idx.iter().map(|&i| self.w(i)).sum();
        if total_w <= 0.0 {
            return None;
        }
        let total_wy: f64 = idx.iter().map(|&i| self.w(i) * self.targets[i]).sum();
        let mean = total_wy / total_w;
        let parent_sse: f64 = idx
            .iter()
            .map(|&i| self.w(i) * (self.targets[i] - mean).powi(2))
            .sum();
        let min_gain = parent_sse * 1e-12;

        let mut best: Option<(usize, f64, f64, usize)> = None;
        let mut order = idx.to_vec();
        for feature in 0..NUM_FEATURES {
            order.sort_by(|&a, &b| {
                self.rows[a][feature]
                    .total_cmp(&self.rows[b][feature])
                    .then(a.cmp(&b))
            });
            let (mut lw, mut lwy) = (0.0, 0.0);
            for pos in 0..n - 1 {
                let i = order[pos];
                lw += self.w(i);
                lwy += self.w(i) * self.targets[i];
                let here = self.rows[i][feature];
                let next = self.rows[order[pos + 1]][feature];
                if here == next {
                    continue;
                }
                let left_n = pos + 1;
                if left_n < self.min_leaf || n - left_n < self.min_leaf {
                    continue;
                }
                let rw = total_w - lw;
                if lw <= 0.0 || rw <= 0.0 {
                    continue;
                }
                let diff = lwy / lw - (total_wy - lwy) / rw;
                let gain = lw * rw / total_w * diff * diff;
                if gain > min_gain && best.is_none_or(|(_, _, g, _)| gain > g) {
                    best = Some((feature, midpoint(here, next), gain, left_n));
                }
            }
        }

        let (feature, threshold, gain, _) = best?;
        let (left, right) = idx
            .iter()
            .partition(|&&i| self.rows[i][feature] <= threshold);
        Some(Split {
            feature,
            threshold,
            gain,
            left,
            right,
        })
    }
}

/// Midpoint of two adjacent distinct values that still separates them
/// under `<=` routing.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi || mid < lo {
        lo
    } else {
        mid
    }
}

pub(crate) fn grow(
    rows: &[FeatureVector],
    targets: &[f64],
    weights: Option<&[f64]>,
    params: TreeParams,
) -> Result<TreeFit> {
    if rows.is_empty() {
        return Err(Error::Empty("cannot fit a tree without rows"));
    }
    if targets.len() != rows.len() {
        return Err(Error::LengthMismatch {
            scores: targets.len(),
            labels: rows.len(),
        });
    }
    if weights.is_some_and(|w| w.len() != rows.len()) {
        return Err(Error::InvalidConfig("one weight per row required".into()));
    }
    if params.max_leaves == 0 {
        return Err(Error::InvalidConfig("max_leaves must be at least 1".into()));
    }

    let sample = Sample {
        rows,
        targets,
        weights,
        min_leaf: params.min_samples_leaf.max(1),
    };
    let all: Vec<usize> = (0..rows.len()).collect();
    let mut nodes = vec![Node::Leaf {
        value: sample.leaf_value(&all),
    }];
    let mut frontier = vec![Frontier {
        node: 0,
        best: if params.max_leaves > 1 {
            sample.best_split(&all)
        } else {
            None
        },
        rows: all,
    }];

    let mut leaves = 1;
    while leaves < params.max_leaves {
        let pick = frontier
            .iter()
            .enumerate()
            .filter_map(|(pos, f)| f.best.as_ref().map(|s| (pos, s.gain)))
            .fold(None, |acc: Option<(usize, f64)>, (pos, g)| match acc {
                Some((_, best)) if best >= g => acc,
                _ => Some((pos, g)),
            });
        let Some((pos, _)) = pick else { break };
        let Frontier { node, best, .. } = frontier.remove(pos);
        let split = best.expect("picked leaves carry a split");

        let left = nodes.len();
        let right = left + 1;
        nodes[node] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        for (child, child_rows) in [(left, split.left), (right, split.right)] {
            nodes.push(Node::Leaf {
                value: sample.leaf_value(&child_rows),
            });
            frontier.push(Frontier {
                node: child,
                best: sample.best_split(&child_rows),
                rows: child_rows,
            });
        }
        leaves += 1;
    }

    let mut row_leaf = vec![0; rows.len()];
    for f in &frontier {
        for &i in &f.rows {
            row_leaf[i] = f.node;
        }
    }
    Ok(TreeFit {
        tree: RegressionTree { nodes },
        row_leaf,
    })
}
