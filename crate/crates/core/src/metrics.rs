//! Discounted cumulative gain and its normalised form.
//!
//! ```text
//! DCG@K  = sum_{k=1..K} (2^rel_k - 1) / log2(k + 1)
//! nDCG@K = DCG@K / IDCG@K
//! ```
//!
//! where IDCG@K is the DCG@K of the labels sorted in descending order. A
//! list whose ideal DCG is zero (every label 0) scores 1.0, since every
//! ordering of it is ideal.

use std::cmp::Ordering;
use std::io::Write;

use serde::Serialize;

use crate::featurizer::QueryGroup;
use crate::{Error, Result};

/// Gain of a graded label, `2^label - 1`.
#[inline]
pub fn gain(label: u32) -> f64 {
    (label as f64).exp2() - 1.0
}

/// Discount of a 0-based rank position, `1 / log2(rank + 2)`.
#[inline]
pub fn discount(rank: usize) -> f64 {
    1.0 / ((rank + 2) as f64).log2()
}

/// DCG@k of labels already in ranked order. An empty list scores 0.
pub fn dcg_at_k(labels: &[u32], k: usize) -> f64 {
    labels
        .iter()
        .take(k)
        .enumerate()
        .map(|(rank, &l)| gain(l) * discount(rank))
        .sum()
}

/// Maximum achievable DCG@k for a label multiset.
pub fn ideal_dcg_at_k(labels: &[u32], k: usize) -> f64 {
    let mut sorted = labels.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    dcg_at_k(&sorted, k)
}

/// Total order used for ranking: NaN sinks to the bottom and `-0.0`
/// compares equal to `0.0`.
fn rank_key(s: f64) -> f64 {
    if s.is_nan() {
        f64::NEG_INFINITY
    } else if s == 0.0 {
        0.0
    } else {
        s
    }
}

/// Indices ordered by descending score, ties by ascending index.
pub fn rank_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        rank_key(scores[b])
            .total_cmp(&rank_key(scores[a]))
            .then(a.cmp(&b))
    });
    order
}

pub(crate) fn compare_scores_desc(a: f64, b: f64) -> Ordering {
    rank_key(b).total_cmp(&rank_key(a))
}

pub fn ndcg_at_k(scores: &[f64], labels: &[u32], k: usize) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    Ok(ndcg_unchecked(scores, labels, k))
}

pub(crate) fn ndcg_unchecked(scores: &[f64], labels: &[u32], k: usize) -> f64 {
    let ideal = ideal_dcg_at_k(labels, k);
    if ideal == 0.0 {
        return 1.0;
    }
    let ranked: Vec<u32> = rank_order(scores).into_iter().map(|i| labels[i]).collect();
    dcg_at_k(&ranked, k) / ideal
}

/// Per-user nDCG@k and its unweighted mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub k: usize,
    pub per_user: Vec<(String, f64)>,
    pub mean_ndcg: f64,
}

impl EvalReport {
    /// `user_id,ndcg` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["user_id", "ndcg"])?;
        for (user, v) in &self.per_user {
            w.write_record([user.as_str(), &format!("{v:.6}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_line(&self) -> String {
        format!("mean_ndcg@{}={:.6}", self.k, self.mean_ndcg)
    }
}

/// Mean nDCG@k over query groups, one score list per group.
pub fn mean_ndcg(groups: &[QueryGroup], scores: &[Vec<f64>], k: usize) -> Result<EvalReport> {
    if groups.is_empty() {
        return Err(Error::Empty("no query groups to evaluate"));
    }
    if groups.len() != scores.len() {
        return Err(Error::LengthMismatch {
            scores: scores.len(),
            labels: groups.len(),
        });
    }
    let mut per_user = Vec::with_capacity(groups.len());
    for (g, s) in groups.iter().zip(scores) {
        per_user.push((g.user_id.clone(), ndcg_at_k(s, &g.labels(), k)?));
    }
    let mean_ndcg = per_user.iter().map(|(_, v)| v).sum::<f64>() / per_user.len() as f64;
    Ok(EvalReport {
        k,
        per_user,
        mean_ndcg,
    })
}

/// Mean nDCG@k without building a report; used inside training loops.
pub(crate) fn mean_ndcg_of(groups: &[QueryGroup], scores: &[Vec<f64>], k: usize) -> f64 {
    let total: f64 = groups
        .iter()
        .zip(scores)
        .map(|(g, s)| ndcg_unchecked(s, &g.labels(), k))
        .sum();
    total / groups.len() as f64
}
