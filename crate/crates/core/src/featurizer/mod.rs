//! Feature vectors for user-item-tweet triples.
//!
//! | index | feature |
//! | ----- | ------- |
//! | F1  | rating |
//! | F2  | rating minus the median of the user's earlier training ratings |
//! | F3  | sqrt of the user's mean training engagement |
//! | F4  | 1 if the user's mean engagement is positive |
//! | F5  | user's mean rating |
//! | F6  | sqrt(friends / max(followers, 1)) of the user |
//! | F7  | sqrt of the user's status count |
//! | F8  | sqrt of the item's mean engagement |
//! | F9  | 1 if the item's mean engagement is positive |
//! | F10 | item's mean rating |
//! | F11 | sqrt of the mean friends/followers ratio of the item's raters |
//! | F12 | sqrt of the mean status count of the item's raters |
//! | F13 | 1 if the tweet mentions someone |
//! | F14 | 1 if the tweet is a retweet |
//! | F15 | 1 if the tweet was retweeted within the training split |
//! | F16 | number of training retweets about the item |
//!
//! Aggregates come from the training split only; users or items missing
//! from it get zeros for the features derived from their history.

mod aggregates;
mod export;
mod normalize;

pub use aggregates::{build_aggregates, AggregateStore, ItemAggregate, UserAggregate};
pub use export::{read_letor, write_letor, LetorRow};
pub use normalize::{apply_normalizer, fit_normalizer, Normalizer};

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Interaction};
use crate::{Error, Result};

pub const NUM_FEATURES: usize = 16;

pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "rating",
    "rating_vs_prior_median",
    "user_engagement_sqrt",
    "user_engaged",
    "user_mean_rating",
    "user_friend_ratio_sqrt",
    "user_statuses_sqrt",
    "item_engagement_sqrt",
    "item_engaged",
    "item_mean_rating",
    "item_friend_ratio_sqrt",
    "item_statuses_sqrt",
    "has_mention",
    "is_retweet",
    "was_retweeted",
    "item_retweets",
];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; NUM_FEATURES] {
        &self.0
    }
}

impl std::ops::Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupEntry {
    pub tweet_id: String,
    pub item_id: String,
    /// Raw rating of the source interaction, independent of normalisation.
    pub rating: u8,
    pub features: FeatureVector,
    pub label: u32,
}

/// All triples of one user: the unit a ranker orders.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryGroup {
    pub user_id: String,
    pub entries: Vec<GroupEntry>,
}

impl QueryGroup {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.label).collect()
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub(crate) fn friend_ratio(friends: u64, followers: u64) -> f64 {
    friends as f64 / followers.max(1) as f64
}

fn label_of(t: &Interaction) -> u32 {
    u32::try_from(t.engagement()).unwrap_or(u32::MAX)
}

/// Raw (unnormalised) features of one triple.
pub fn extract_features(t: &Interaction, agg: &AggregateStore) -> FeatureVector {
    let mut f = [0.0; NUM_FEATURES];
    f[0] = f64::from(t.rating);

    match agg.user(&t.user_id) {
        Some(u) => {
            f[1] = u
                .prior_median(t.timestamp)
                .map_or(0.0, |m| f64::from(t.rating) - f64::from(m));
            f[2] = u.mean_engagement.sqrt();
            f[3] = indicator(u.mean_engagement > 0.0);
            f[4] = u.mean_rating;
            f[5] = friend_ratio(u.friends, u.followers).sqrt();
            f[6] = (u.statuses as f64).sqrt();
        }
        None => {
            // Cold-start user: no history, but the tweet still carries the
            // author's current profile counts.
            f[5] = friend_ratio(t.user_friends, t.user_followers).sqrt();
            f[6] = (t.user_statuses as f64).sqrt();
        }
    }

    if let Some(i) = agg.item(&t.item_id) {
        f[7] = i.mean_engagement.sqrt();
        f[8] = indicator(i.mean_engagement > 0.0);
        f[9] = i.mean_rating;
        f[10] = i.mean_friend_ratio.sqrt();
        f[11] = i.mean_statuses.sqrt();
        f[15] = i.retweet_count as f64;
    }

    f[12] = indicator(t.has_mention);
    f[13] = indicator(t.is_retweet());
    f[14] = indicator(agg.was_retweeted(&t.tweet_id));
    FeatureVector(f)
}

/// Bounds on per-user interaction counts; users outside them are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneBounds {
    pub min: usize,
    pub max: usize,
}

impl Default for PruneBounds {
    fn default() -> Self {
        Self { min: 4, max: 200 }
    }
}

/// Drops every interaction of users with fewer than `bounds.min` or more
/// than `bounds.max` interactions in `d`.
pub fn prune_outlier_users(d: &Dataset, bounds: PruneBounds) -> Result<Dataset> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in d.iter() {
        *counts.entry(&t.user_id).or_default() += 1;
    }
    let kept: Vec<Interaction> = d
        .iter()
        .filter(|t| (bounds.min..=bounds.max).contains(&counts[t.user_id.as_str()]))
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(Error::OverPruned {
            min: bounds.min,
            max: bounds.max,
        });
    }
    Ok(Dataset::new(d.name.clone(), kept))
}

/// Groups the triples of `d` by user (in order of first appearance) with
/// features extracted against `agg`, normalised when `normalizer` is given.
pub fn featurize_dataset(
    d: &Dataset,
    agg: &AggregateStore,
    normalizer: Option<&Normalizer>,
) -> Vec<QueryGroup> {
    let vectors: Vec<FeatureVector> = d
        .interactions
        .par_iter()
        .map(|t| {
            let raw = extract_features(t, agg);
            match normalizer {
                Some(n) => apply_normalizer(n, &raw),
                None => raw,
            }
        })
        .collect();

    let mut slots: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<QueryGroup> = Vec::new();
    for (t, features) in d.iter().zip(vectors) {
        let slot = *slots.entry(&t.user_id).or_insert_with(|| {
            groups.push(QueryGroup {
                user_id: t.user_id.clone(),
                entries: Vec::new(),
            });
            groups.len() - 1
        });
        groups[slot].entries.push(GroupEntry {
            tweet_id: t.tweet_id.clone(),
            item_id: t.item_id.clone(),
            rating: t.rating,
            features,
            label: label_of(t),
        });
    }
    groups
}
