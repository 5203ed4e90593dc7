//! End-to-end flows shared by the command line and the acceptance tests.
//!
//! Training: aggregates over the full training split, outlier pruning,
//! z-score fitting on the pruned matrix, a chronological 80/20 cut of the
//! pruned records into fitting and validation parts, MART and LambdaMART
//! with early stopping, then a validated blend.

use crate::baselines::Baseline;
use crate::dataset::{floor_share, Dataset};
use crate::featurizer::{
    build_aggregates, extract_features, featurize_dataset, fit_normalizer, prune_outlier_users,
    AggregateStore, PruneBounds, QueryGroup,
};
use crate::metrics::{mean_ndcg, EvalReport};
use crate::ranker::{
    fit_blend_weights, rank_by_scores, train_lambdamart, train_mart, BoostParams, RankingModel,
    Role, TrainOutcome,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub boost: BoostParams,
    pub prune: PruneBounds,
    /// Share of the pruned training records held out for early stopping and
    /// blend weights.
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            boost: BoostParams::default(),
            prune: PruneBounds::default(),
            validation_fraction: 0.2,
        }
    }
}

pub struct TrainReport {
    pub model: RankingModel,
    pub mart: TrainOutcome,
    pub lambdamart: TrainOutcome,
    pub fit_groups: usize,
    pub valid_groups: usize,
    /// Validation nDCG of the chosen blend.
    pub blend_valid_ndcg: f64,
}

impl TrainReport {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.lambdamart.degenerate {
            out.push(
                "LambdaMART found no label differences to learn from; using the base score".into(),
            );
        }
        if self.mart.degenerate {
            out.push("MART made no progress beyond the mean label".into());
        }
        out
    }
}

/// Cuts `d` chronologically into leading and trailing parts, the trailing
/// part holding `tail_fraction` of the records.
fn chronological_holdout(d: &Dataset, tail_fraction: f64) -> (Dataset, Dataset) {
    let mut sorted = d.clone().sorted_chronologically().interactions;
    let head = floor_share(1.0 - tail_fraction, sorted.len());
    let tail = sorted.split_off(head);
    (
        Dataset::new(format!("{}-fit", d.name), sorted),
        Dataset::new(format!("{}-valid", d.name), tail),
    )
}

pub fn train_pipeline(train: &Dataset, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.boost.validate()?;
    if !(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "validation fraction {} outside [0, 1)",
            cfg.validation_fraction
        )));
    }
    let agg = build_aggregates(train)?;
    let pruned = prune_outlier_users(train, cfg.prune)?;
    let raw: Vec<_> = pruned.iter().map(|t| extract_features(t, &agg)).collect();
    let normalizer = fit_normalizer(&raw)?;

    let (fit_part, valid_part) = chronological_holdout(&pruned, cfg.validation_fraction);
    let fit = featurize_dataset(&fit_part, &agg, Some(&normalizer));
    let valid = featurize_dataset(&valid_part, &agg, Some(&normalizer));
    if fit.is_empty() {
        return Err(Error::Empty(
            "no training records left after the validation holdout",
        ));
    }

    let lambdamart = train_lambdamart(&fit, &valid, &cfg.boost)?;
    let mart = train_mart(&fit, &valid, &cfg.boost)?;
    // Without a validation part the weights are chosen on the fitting data.
    let blend_on = if valid.is_empty() { &fit } else { &valid };
    let blend = fit_blend_weights(
        vec![
            (Role::LambdaMart, lambdamart.ensemble.clone()),
            (Role::Mart, mart.ensemble.clone()),
        ],
        blend_on,
        cfg.boost.ndcg_cutoff,
    )?;
    let scores: Vec<Vec<f64>> = blend_on.iter().map(|g| blend.score_group(g)).collect();
    let blend_valid_ndcg = mean_ndcg(blend_on, &scores, cfg.boost.ndcg_cutoff)?.mean_ndcg;

    Ok(TrainReport {
        model: RankingModel {
            params: cfg.boost,
            normalizer,
            blend,
        },
        mart,
        lambdamart,
        fit_groups: fit.len(),
        valid_groups: valid.len(),
        blend_valid_ndcg,
    })
}

/// What produces the scores being evaluated.
#[derive(Debug, Clone, Copy)]
pub enum Scorer<'a> {
    Model(&'a RankingModel),
    Baseline(Baseline),
    /// Scores every triple by its own label; the upper bound of the metric.
    Ideal,
}

impl Scorer<'_> {
    /// Query groups of `data` in the representation this scorer expects.
    pub fn groups(&self, data: &Dataset, agg: &AggregateStore) -> Vec<QueryGroup> {
        match self {
            Scorer::Model(m) => featurize_dataset(data, agg, Some(&m.normalizer)),
            _ => featurize_dataset(data, agg, None),
        }
    }

    pub fn scores(&self, g: &QueryGroup, agg: &AggregateStore, seed: u64) -> Vec<f64> {
        match self {
            Scorer::Model(m) => m.blend.score_group(g),
            Scorer::Baseline(b) => b.scores(g, agg, seed),
            Scorer::Ideal => g.entries.iter().map(|e| f64::from(e.label)).collect(),
        }
    }
}

/// Mean nDCG@k of `scorer` over the users of `data`, with aggregates taken
/// from `train`.
pub fn evaluate(
    scorer: Scorer<'_>,
    train: &Dataset,
    data: &Dataset,
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    let agg = build_aggregates(train)?;
    evaluate_with(scorer, &agg, data, k, seed)
}

pub fn evaluate_with(
    scorer: Scorer<'_>,
    agg: &AggregateStore,
    data: &Dataset,
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let groups = scorer.groups(data, agg);
    let scores: Vec<Vec<f64>> = groups.iter().map(|g| scorer.scores(g, agg, seed)).collect();
    mean_ndcg(&groups, &scores, k)
}

/// One user's tweet ids, best first.
pub fn rank_for_user(
    scorer: Scorer<'_>,
    train: &Dataset,
    data: &Dataset,
    user_id: &str,
    seed: u64,
) -> Result<Vec<String>> {
    let agg = build_aggregates(train)?;
    let own = Dataset::new(
        data.name.clone(),
        data.iter()
            .filter(|t| t.user_id == user_id)
            .cloned()
            .collect(),
    );
    let group = scorer
        .groups(&own, &agg)
        .into_iter()
        .next()
        .ok_or_else(|| Error::UnknownUser(user_id.to_string()))?;
    Ok(rank_by_scores(&group, &scorer.scores(&group, &agg, seed)))
}
