use rayon::prelude::*;

use crate::featurizer::QueryGroup;
use crate::metrics::{discount, gain, ideal_dcg_at_k, mean_ndcg_of, rank_order};
use crate::trees::grow;
use crate::{Error, Result};

use super::boost::{Flat, TrainOutcome, Validation, NEWTON_EPSILON};
use super::{BoostParams, TreeEnsemble};

/// λ-gradients and their second-order weights for one query group.
///
/// For every pair with `labels[i] > labels[j]`:
///
/// ```text
/// rho   = 1 / (1 + exp(sigma * (s_i - s_j)))
/// delta = |nDCG@k change from swapping i and j in the current ranking|
/// λ_i  += sigma * rho * delta        λ_j -= sigma * rho * delta
/// h_i  += sigma² * rho * (1 - rho) * delta, and the same for h_j
/// ```
///
/// Positive λ pushes an item up the ranking.
pub fn compute_lambdas(
    scores: &[f64],
    labels: &[u32],
    k: usize,
    sigma: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = scores.len().min(labels.len());
    let mut lambdas = vec![0.0; n];
    let mut hessians = vec![0.0; n];
    if n < 2 {
        return (lambdas, hessians);
    }
    let ideal = ideal_dcg_at_k(&labels[..n], k);
    if ideal == 0.0 {
        return (lambdas, hessians);
    }

    let mut rank = vec![0; n];
    for (pos, i) in rank_order(&scores[..n]).into_iter().enumerate() {
        rank[i] = pos;
    }
    let disc = |i: usize| if rank[i] < k { discount(rank[i]) } else { 0.0 };
    let gains: Vec<f64> = labels[..n].iter().map(|&l| gain(l)).collect();

    for i in 0..n {
        for j in 0..n {
            if labels[i] <= labels[j] {
                continue;
            }
            let delta = ((gains[i] - gains[j]) * (disc(i) - disc(j))).abs() / ideal;
            if delta == 0.0 {
                continue;
            }
            let rho = 1.0 / (1.0 + (sigma * (scores[i] - scores[j])).exp());
            let lambda = sigma * rho * delta;
            let h = sigma * sigma * rho * (1.0 - rho) * delta;
            lambdas[i] += lambda;
            lambdas[j] -= lambda;
            hessians[i] += h;
            hessians[j] += h;
        }
    }
    (lambdas, hessians)
}

/// LambdaMART: each round fits a regression tree to the λ-gradients of the
/// current scores and sets every leaf to its Newton step
/// `sum λ / (sum h + ε)`. The ensemble starts from score 0.
pub fn train_lambdamart(
    train: &[QueryGroup],
    valid: &[QueryGroup],
    p: &BoostParams,
) -> Result<TrainOutcome> {
    p.validate()?;
    let flat = Flat::new(train);
    if flat.len() == 0 {
        return Err(Error::Empty("LambdaMART needs training rows"));
    }
    let k = p.ndcg_cutoff;
    let mut ensemble = TreeEnsemble::new(0.0, p.shrinkage);
    let mut scores = vec![0.0; flat.len()];
    let train_ndcg = |scores: &[f64]| mean_ndcg_of(train, &flat.split_scores(scores), k);
    let mut train_metric = vec![train_ndcg(&scores)];
    let mut validation = Validation::new(valid, 0.0, k, p.early_stop_rounds);
    let mut degenerate = false;

    while ensemble.len() < p.max_trees {
        let per_group: Vec<(Vec<f64>, Vec<f64>)> = (0..train.len())
            .into_par_iter()
            .map(|g| {
                let span = flat.span(g);
                compute_lambdas(&scores[span.clone()], &flat.labels[span], k, p.sigma)
            })
            .collect();
        let (lambdas, hessians): (Vec<f64>, Vec<f64>) = per_group
            .into_iter()
            .flat_map(|(l, h)| l.into_iter().zip(h))
            .unzip();
        if lambdas.iter().all(|&l| l == 0.0) {
            degenerate = ensemble.is_empty();
            break;
        }

        let mut fit = grow(&flat.rows, &lambdas, None, p.tree_params())?;
        let mut sums = vec![(0.0, 0.0); fit.tree.nodes().len()];
        for ((&leaf, l), h) in fit.row_leaf.iter().zip(&lambdas).zip(&hessians) {
            sums[leaf].0 += l;
            sums[leaf].1 += h;
        }
        let mut touched: Vec<usize> = fit.row_leaf.clone();
        touched.sort_unstable();
        touched.dedup();
        for leaf in touched {
            let (l, h) = sums[leaf];
            fit.tree.set_leaf_value(leaf, l / (h + NEWTON_EPSILON));
        }

        for (score, row) in scores.iter_mut().zip(&flat.rows) {
            *score += p.shrinkage * fit.tree.predict(row);
        }
        train_metric.push(train_ndcg(&scores));
        let stop = validation.push_tree(&fit.tree, p.shrinkage);
        ensemble.trees.push(fit.tree);
        if stop {
            break;
        }
    }

    let trees_built = ensemble.len();
    ensemble.trees.truncate(validation.keep(trees_built));
    Ok(TrainOutcome {
        ensemble,
        valid_ndcg: validation.curve,
        train_metric,
        trees_built,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranker::tests::group;

    #[test]
    fn hand_pair() {
        let (l, h) = compute_lambdas(&[0.0, 0.0], &[3, 0], 2, 1.0);
        let delta = 1.0 - 1.0 / 3f64.log2();
        assert!((l[0] - 0.5 * delta).abs() < 1e-15);
        assert!((l[0] - 0.184535).abs() < 1e-6);
        assert_eq!(l[1], -l[0]);
        assert!((h[0] - 0.25 * delta).abs() < 1e-15);
        assert_eq!(h[0], h[1]);
    }

    #[test]
    fn no_ordered_pairs_no_gradient() {
        let (l, h) = compute_lambdas(&[0.3, 0.1, 0.2], &[2, 2, 2], 10, 1.0);
        assert!(l.iter().chain(&h).all(|&x| x == 0.0));
        let (l, _) = compute_lambdas(&[0.3], &[2], 10, 1.0);
        assert_eq!(l, [0.0]);
    }

    #[test]
    fn separable_single_user() {
        let train = vec![group("u", &[(&[0.0], 5), (&[1.0], 0)])];
        let p = BoostParams {
            max_trees: 50,
            ..Default::default()
        };
        let out = train_lambdamart(&train, &[], &p).unwrap();
        let e = &out.ensemble;
        let s: Vec<f64> = train[0]
            .entries
            .iter()
            .map(|x| e.predict(&x.features))
            .collect();
        assert!(s[0] > s[1], "{s:?}");
        assert_eq!(*out.train_metric.last().unwrap(), 1.0);
    }

    #[test]
    fn zero_labels_degenerate() {
        let train = vec![group("u", &[(&[0.0], 0), (&[1.0], 0)])];
        let out = train_lambdamart(&train, &train, &BoostParams::default()).unwrap();
        assert!(out.degenerate);
        assert!(out.ensemble.is_empty());
        assert_eq!(out.ensemble.base_score, 0.0);
    }
}
