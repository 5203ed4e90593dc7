//! Reference scorers: the tweet's rating, the item's historical mean
//! engagement, and a keyed uniform random score.

use std::fmt;
use std::str::FromStr;

use crate::featurizer::{AggregateStore, QueryGroup};

/// Scores each entry by its raw rating.
pub fn rec_rating(g: &QueryGroup) -> Vec<f64> {
    g.entries.iter().map(|e| f64::from(e.rating)).collect()
}

/// Scores each entry by the training mean engagement of its item; unseen
/// items score 0.
pub fn rec_hei(g: &QueryGroup, agg: &AggregateStore) -> Vec<f64> {
    g.entries
        .iter()
        .map(|e| agg.item(&e.item_id).map_or(0.0, |i| i.mean_engagement))
        .collect()
}

/// Uniform scores in `[0, 1)` from a counter-based stream keyed by
/// `(seed, user_id)`, so each user's draws are independent of evaluation
/// order.
pub fn rec_random(g: &QueryGroup, seed: u64) -> Vec<f64> {
    let key = splitmix64(seed ^ fnv1a(g.user_id.as_bytes()));
    (0..g.len() as u64)
        .map(|i| unit_interval(splitmix64(key.wrapping_add(i.wrapping_mul(GOLDEN_GAMMA)))))
        .collect()
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xCBF2_9CE4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Top 53 bits as a float in `[0, 1)`.
fn unit_interval(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Rating,
    HistoricalEngagement,
    Random,
}

impl Baseline {
    pub fn scores(&self, g: &QueryGroup, agg: &AggregateStore, seed: u64) -> Vec<f64> {
        match self {
            Baseline::Rating => rec_rating(g),
            Baseline::HistoricalEngagement => rec_hei(g, agg),
            Baseline::Random => rec_random(g, seed),
        }
    }
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "recRating" => Ok(Baseline::Rating),
            "recHEI" => Ok(Baseline::HistoricalEngagement),
            "recRandom" => Ok(Baseline::Random),
            other => Err(format!("unknown baseline `{other}`")),
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::Rating => "recRating",
            Baseline::HistoricalEngagement => "recHEI",
            Baseline::Random => "recRandom",
        })
    }
}
