use crate::featurizer::QueryGroup;
use crate::trees::grow;
use crate::{Error, Result};

use super::boost::{Flat, TrainOutcome, Validation};
use super::{BoostParams, TreeEnsemble};

/// Least-squares gradient boosting on the engagement label.
///
/// Starts from the global mean label; each tree fits the current residuals
/// with leaf means. An empty `valid` disables early stopping.
pub fn train_mart(
    train: &[QueryGroup],
    valid: &[QueryGroup],
    p: &BoostParams,
) -> Result<TrainOutcome> {
    p.validate()?;
    let flat = Flat::new(train);
    if flat.len() == 0 {
        return Err(Error::Empty("MART needs training rows"));
    }
    let targets: Vec<f64> = flat.labels.iter().map(|&l| f64::from(l)).collect();
    let base = targets.iter().sum::<f64>() / targets.len() as f64;

    let mut ensemble = TreeEnsemble::new(base, p.shrinkage);
    let mut pred = vec![base; flat.len()];
    let mse = |pred: &[f64]| {
        pred.iter()
            .zip(&targets)
            .map(|(p, y)| (y - p) * (y - p))
            .sum::<f64>()
            / pred.len() as f64
    };
    let mut train_metric = vec![mse(&pred)];
    let mut validation = Validation::new(valid, base, p.ndcg_cutoff, p.early_stop_rounds);

    while ensemble.len() < p.max_trees {
        let residuals: Vec<f64> = targets.iter().zip(&pred).map(|(y, p)| y - p).collect();
        let fit = grow(&flat.rows, &residuals, None, p.tree_params())?;
        if fit.tree.is_null() {
            break;
        }
        for (score, row) in pred.iter_mut().zip(&flat.rows) {
            *score += p.shrinkage * fit.tree.predict(row);
        }
        train_metric.push(mse(&pred));
        let stop = validation.push_tree(&fit.tree, p.shrinkage);
        ensemble.trees.push(fit.tree);
        if stop {
            break;
        }
    }

    let trees_built = ensemble.len();
    let kept = validation.keep(trees_built);
    ensemble.trees.truncate(kept);
    Ok(TrainOutcome {
        ensemble,
        valid_ndcg: validation.curve,
        train_metric,
        trees_built,
        degenerate: trees_built == 0,
    })
}
