//! Boosted tree rankers and their linear blend.
//!
//! [`train_mart`] fits a pointwise least-squares ensemble to engagement,
//! [`train_lambdamart`] fits trees to λ-gradients that target nDCG@k, and
//! [`fit_blend_weights`] mixes the two on a validation split. Both trainers
//! stop early once validation nDCG stops improving and keep the best
//! prefix of trees.

mod blend;
mod boost;
mod lambdamart;
mod mart;
mod model_file;

pub use blend::{fit_blend_weights, BLEND_GRID_STEPS};
pub use boost::{TrainOutcome, NEWTON_EPSILON};
pub use lambdamart::{compute_lambdas, train_lambdamart};
pub use mart::train_mart;
pub use model_file::{RankingModel, FORMAT_VERSION};

use serde::{Deserialize, Serialize};

use crate::featurizer::{FeatureVector, QueryGroup};
use crate::metrics::compare_scores_desc;
use crate::trees::{RegressionTree, TreeParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    /// Upper bound; early stopping usually ends training sooner.
    pub max_trees: usize,
    pub leaves_per_tree: usize,
    pub min_samples_leaf: usize,
    pub shrinkage: f64,
    pub early_stop_rounds: usize,
    pub ndcg_cutoff: usize,
    /// Steepness of the pairwise logistic weight.
    pub sigma: f64,
    pub seed: u64,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            max_trees: 1000,
            leaves_per_tree: 10,
            min_samples_leaf: 1,
            shrinkage: 0.1,
            early_stop_rounds: 50,
            ndcg_cutoff: 10,
            sigma: 1.0,
            seed: 0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "shrinkage {} outside (0, 1]",
                self.shrinkage
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma {} must be positive",
                self.sigma
            )));
        }
        for (name, v) in [
            ("max_trees", self.max_trees),
            ("leaves_per_tree", self.leaves_per_tree),
            ("min_samples_leaf", self.min_samples_leaf),
            ("early_stop_rounds", self.early_stop_rounds),
            ("ndcg_cutoff", self.ndcg_cutoff),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    pub(crate) fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_leaves: self.leaves_per_tree,
            min_samples_leaf: self.min_samples_leaf,
        }
    }
}

/// `base_score` plus the shrunk outputs of each tree, accumulated in tree
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub trees: Vec<RegressionTree>,
    pub shrinkage: f64,
    pub base_score: f64,
}

impl TreeEnsemble {
    pub fn new(base_score: f64, shrinkage: f64) -> Self {
        Self {
            trees: Vec::new(),
            shrinkage,
            base_score,
        }
    }

    pub fn predict(&self, v: &FeatureVector) -> f64 {
        self.trees.iter().fold(self.base_score, |acc, t| {
            acc + self.shrinkage * t.predict(v)
        })
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// The ensemble made of the first `n` trees.
    pub fn prefix(&self, n: usize) -> Self {
        Self {
            trees: self.trees[..n.min(self.trees.len())].to_vec(),
            shrinkage: self.shrinkage,
            base_score: self.base_score,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Mart,
    LambdaMart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlendMember {
    pub role: Role,
    pub weight: f64,
    pub ensemble: TreeEnsemble,
}

/// Weighted sum of ensemble scores.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBlend {
    members: Vec<BlendMember>,
}

impl LinearBlend {
    pub fn new(members: Vec<BlendMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidModel(
                "a blend needs at least one member".into(),
            ));
        }
        Ok(Self { members })
    }

    pub fn single(role: Role, ensemble: TreeEnsemble) -> Self {
        Self {
            members: vec![BlendMember {
                role,
                weight: 1.0,
                ensemble,
            }],
        }
    }

    pub fn members(&self) -> &[BlendMember] {
        &self.members
    }

    pub fn score(&self, v: &FeatureVector) -> f64 {
        combine(
            self.members
                .iter()
                .map(|m| (m.weight, m.ensemble.predict(v))),
        )
    }

    pub fn score_group(&self, g: &QueryGroup) -> Vec<f64> {
        g.entries.iter().map(|e| self.score(&e.features)).collect()
    }
}

/// `sum weight * score`, accumulated from 0 in member order.
pub(crate) fn combine(parts: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    parts.into_iter().fold(0.0, |acc, (w, s)| acc + w * s)
}

pub fn score(model: &LinearBlend, v: &FeatureVector) -> f64 {
    model.score(v)
}

/// Tweet ids by descending score; equal scores by ascending tweet id.
pub fn rank_user(model: &LinearBlend, g: &QueryGroup) -> Vec<String> {
    rank_by_scores(g, &model.score_group(g))
}

pub fn rank_by_scores(g: &QueryGroup, scores: &[f64]) -> Vec<String> {
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| {
        compare_scores_desc(scores[a], scores[b])
            .then_with(|| g.entries[a].tweet_id.cmp(&g.entries[b].tweet_id))
    });
    order
        .into_iter()
        .map(|i| g.entries[i].tweet_id.clone())
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::featurizer::{GroupEntry, NUM_FEATURES};

    pub(crate) fn fv(values: &[f64]) -> FeatureVector {
        let mut f = [0.0; NUM_FEATURES];
        f[..values.len()].copy_from_slice(values);
        FeatureVector(f)
    }

    pub(crate) fn group(user: &str, rows: &[(&[f64], u32)]) -> QueryGroup {
        QueryGroup {
            user_id: user.into(),
            entries: rows
                .iter()
                .enumerate()
                .map(|(i, (f, label))| GroupEntry {
                    tweet_id: format!("{user}-{i}"),
                    item_id: "i".into(),
                    rating: 5,
                    features: fv(f),
                    label: *label,
                })
                .collect(),
        }
    }

    #[test]
    fn blend_scores() {
        let two = TreeEnsemble::new(2.0, 0.1);
        let four = TreeEnsemble::new(4.0, 0.1);
        let v = fv(&[]);
        assert_eq!(LinearBlend::single(Role::Mart, two.clone()).score(&v), 2.0);
        let blend = LinearBlend::new(vec![
            BlendMember {
                role: Role::LambdaMart,
                weight: 0.5,
                ensemble: two,
            },
            BlendMember {
                role: Role::Mart,
                weight: 0.5,
                ensemble: four,
            },
        ])
        .unwrap();
        assert_eq!(score(&blend, &v), 3.0);
        assert!(LinearBlend::new(vec![]).is_err());
    }

    #[test]
    fn ensemble_prediction_sums_shrunk_trees() {
        let mut e = TreeEnsemble::new(1.0, 0.5);
        e.trees.push(RegressionTree::constant(2.0));
        e.trees.push(RegressionTree::constant(4.0));
        assert_eq!(e.predict(&fv(&[])), 4.0);
        assert_eq!(e.prefix(1).predict(&fv(&[])), 2.0);
    }

    #[test]
    fn ranking_order_and_ties() {
        let g = group("u", &[(&[0.0], 0), (&[1.0], 0), (&[2.0], 0)]);
        assert_eq!(rank_by_scores(&g, &[2.0, 1.0, 3.0]), ["u-2", "u-0", "u-1"]);
        assert_eq!(rank_by_scores(&g, &[1.0, 1.0, 1.0]), ["u-0", "u-1", "u-2"]);
        let constant = LinearBlend::single(Role::Mart, TreeEnsemble::new(0.0, 0.1));
        let mut out = rank_user(&constant, &g);
        out.sort();
        assert_eq!(out, ["u-0", "u-1", "u-2"]);
    }

    #[test]
    fn params_validation() {
        assert!(BoostParams::default().validate().is_ok());
        let bad = BoostParams {
            shrinkage: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = BoostParams {
            shrinkage: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = BoostParams {
            leaves_per_tree: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
