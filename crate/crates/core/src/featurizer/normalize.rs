use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::{FeatureVector, NUM_FEATURES};

/// Per-feature z-score parameters (population form).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: [f64; NUM_FEATURES],
    pub std: [f64; NUM_FEATURES],
}

pub fn fit_normalizer(vectors: &[FeatureVector]) -> Result<Normalizer> {
    if vectors.is_empty() {
        return Err(Error::Empty("cannot fit a normalizer without vectors"));
    }
    let n = vectors.len() as f64;
    let mut mean = [0.0; NUM_FEATURES];
    let mut std = [0.0; NUM_FEATURES];
    for j in 0..NUM_FEATURES {
        let column = || vectors.iter().map(|v| v.0[j]);
        let first = vectors[0].0[j];
        let m = column().sum::<f64>() / n;
        mean[j] = m;
        // A constant column gets exactly zero spread, whatever rounding the
        // mean picked up.
        if column().all(|x| x == first) {
            mean[j] = first;
            continue;
        }
        let var = column().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        std[j] = var.sqrt();
    }
    Ok(Normalizer { mean, std })
}

/// `(x - mean) / std` per feature; zero-spread features map to 0.
pub fn apply_normalizer(n: &Normalizer, v: &FeatureVector) -> FeatureVector {
    let mut out = [0.0; NUM_FEATURES];
    for (j, slot) in out.iter_mut().enumerate() {
        if n.std[j] > 0.0 {
            *slot = (v.0[j] - n.mean[j]) / n.std[j];
        }
    }
    FeatureVector(out)
}

impl Normalizer {
    pub fn apply(&self, v: &FeatureVector) -> FeatureVector {
        apply_normalizer(self, v)
    }
}
