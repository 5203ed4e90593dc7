use crate::featurizer::QueryGroup;
use crate::metrics::mean_ndcg_of;
use crate::{Error, Result};

use super::{combine, BlendMember, LinearBlend, Role, TreeEnsemble};

/// Number of steps in the weight grid `{0, 1/20, ..., 1}`.
pub const BLEND_GRID_STEPS: usize = 20;

/// Chooses weights `(w, 1 - w)` for two members by grid search on
/// validation mean nDCG@k. Ties favour the larger weight on the first
/// member. A single member gets weight 1.
pub fn fit_blend_weights(
    members: Vec<(Role, TreeEnsemble)>,
    valid: &[QueryGroup],
    k: usize,
) -> Result<LinearBlend> {
    if valid.is_empty() {
        return Err(Error::Empty("blend weights need validation groups"));
    }
    let mut members = members.into_iter();
    let (first, second) = match (members.next(), members.next(), members.next()) {
        (Some(a), None, _) => return Ok(LinearBlend::single(a.0, a.1)),
        (Some(a), Some(b), None) => (a, b),
        (None, ..) => {
            return Err(Error::InvalidModel(
                "a blend needs at least one member".into(),
            ))
        }
        _ => {
            return Err(Error::InvalidModel(
                "weight search supports two members".into(),
            ))
        }
    };

    let predict = |e: &TreeEnsemble| -> Vec<Vec<f64>> {
        valid
            .iter()
            .map(|g| g.entries.iter().map(|x| e.predict(&x.features)).collect())
            .collect()
    };
    let (a, b) = (predict(&first.1), predict(&second.1));

    let mut best: Option<(usize, f64)> = None;
    for step in (0..=BLEND_GRID_STEPS).rev() {
        let (wa, wb) = weights(step);
        let mixed: Vec<Vec<f64>> = a
            .iter()
            .zip(&b)
            .map(|(ga, gb)| {
                ga.iter()
                    .zip(gb)
                    .map(|(&x, &y)| combine([(wa, x), (wb, y)]))
                    .collect()
            })
            .collect();
        let value = mean_ndcg_of(valid, &mixed, k);
        if best.is_none_or(|(_, v)| value > v) {
            best = Some((step, value));
        }
    }
    let (wa, wb) = weights(best.expect("grid is non-empty").0);
    LinearBlend::new(vec![
        BlendMember {
            role: first.0,
            weight: wa,
            ensemble: first.1,
        },
        BlendMember {
            role: second.0,
            weight: wb,
            ensemble: second.1,
        },
    ])
}

fn weights(step: usize) -> (f64, f64) {
    let n = BLEND_GRID_STEPS as f64;
    (step as f64 / n, (BLEND_GRID_STEPS - step) as f64 / n)
}
