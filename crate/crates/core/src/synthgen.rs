//! Seeded synthetic tweet-interaction datasets.
//!
//! Ratings combine a user bias, an item quality and noise. Engagement per
//! tweet is
//!
//! ```text
//! round(max(0, rating_effect * (rating - 5)
//!              + metadata_effect * (ln(1 + followers) + MENTION_GAIN * mention)
//!              + noise * N(0, 1)))
//! ```
//!
//! Profile counts are log-normal per user, follower counts grow over the
//! timeline, and items are drawn with Zipf-like popularity.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::dataset::{Dataset, Interaction, MAX_RATING};
use crate::{Error, Result};

/// Engagement bonus of a tweet that mentions someone, in units of
/// `metadata_effect`.
pub const MENTION_GAIN: f64 = 4.0;

/// First timestamp of generated data (2013-02-28 14:43 UTC).
pub const START_TIMESTAMP: i64 = 1_362_062_580;
const TIMELINE_SECONDS: i64 = 390 * 24 * 3600;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub user_count: usize,
    pub item_count: usize,
    /// Inclusive bounds; each user's count is uniform between them.
    pub interactions_per_user: (usize, usize),
    pub rating_effect: f64,
    pub metadata_effect: f64,
    pub noise: f64,
    pub retweet_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            user_count: 200,
            item_count: 50,
            interactions_per_user: (4, 40),
            rating_effect: 1.0,
            metadata_effect: 0.3,
            noise: 1.0,
            retweet_fraction: 0.05,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.user_count == 0 || self.item_count == 0 {
            return bad("user and item counts must be at least 1".into());
        }
        let (lo, hi) = self.interactions_per_user;
        if lo == 0 || lo > hi {
            return bad(format!(
                "interactions per user range {lo}..={hi} is invalid"
            ));
        }
        for (name, v) in [
            ("rating_effect", self.rating_effect),
            ("metadata_effect", self.metadata_effect),
            ("noise", self.noise),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.retweet_fraction) {
            return bad(format!(
                "retweet_fraction {} outside [0, 1]",
                self.retweet_fraction
            ));
        }
        Ok(())
    }
}

struct User {
    bias: f64,
    followers: f64,
    friends: u64,
    statuses: u64,
    mention_rate: f64,
}

struct Draft {
    user: usize,
    item: usize,
    timestamp: i64,
    rating: u8,
    mention: bool,
    followers: u64,
    statuses: u64,
}

fn normal(mean: f64, sd: f64) -> Normal<f64> {
    Normal::new(mean, sd).expect("valid normal parameters")
}

fn lognormal(mu: f64, sigma: f64) -> LogNormal<f64> {
    LogNormal::new(mu, sigma).expect("valid log-normal parameters")
}

pub fn generate(c: &SynthConfig) -> Result<Dataset> {
    c.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);

    let item_quality: Vec<f64> = (0..c.item_count)
        .map(|_| normal(0.0, 1.0).sample(&mut rng))
        .collect();
    let popularity =
        WeightedIndex::new((0..c.item_count).map(|r| 1.0 / (r as f64 + 1.0).powf(0.9)))
            .expect("positive popularity weights");

    let followers = lognormal(5.0, 1.5);
    let friends = lognormal(5.0, 1.0);
    let statuses = lognormal(7.0, 1.5);
    let users: Vec<User> = (0..c.user_count)
        .map(|_| User {
            bias: normal(0.0, 0.8).sample(&mut rng),
            followers: followers.sample(&mut rng),
            friends: friends.sample(&mut rng).round() as u64,
            statuses: statuses.sample(&mut rng).round() as u64,
            mention_rate: rng.random_range(0.05..0.6),
        })
        .collect();

    let rating_noise = normal(0.0, 1.5);
    let mut drafts = Vec::new();
    for (u, user) in users.iter().enumerate() {
        let count = rng.random_range(c.interactions_per_user.0..=c.interactions_per_user.1);
        for _ in 0..count {
            let item = popularity.sample(&mut rng);
            let offset = rng.random_range(0..TIMELINE_SECONDS);
            let progress = offset as f64 / TIMELINE_SECONDS as f64;
            let raw = 6.5 + user.bias + item_quality[item] + rating_noise.sample(&mut rng);
            drafts.push(Draft {
                user: u,
                item,
                timestamp: START_TIMESTAMP + offset,
                rating: raw.round().clamp(1.0, f64::from(MAX_RATING)) as u8,
                mention: rng.random_bool(user.mention_rate),
                followers: (user.followers * (1.0 + 0.5 * progress)).round() as u64,
                statuses: user.statuses + (progress * 500.0) as u64,
            });
        }
    }
    drafts.sort_by_key(|d| (d.timestamp, d.user));

    let width = drafts.len().to_string().len();
    let standard = normal(0.0, 1.0);
    let mut by_item: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut out: Vec<Interaction> = Vec::with_capacity(drafts.len());
    for (pos, d) in drafts.iter().enumerate() {
        let retweet_of = if pos > 0 && rng.random_bool(c.retweet_fraction) {
            let target = match by_item.get(&d.item) {
                Some(earlier) => earlier[rng.random_range(0..earlier.len())],
                None => rng.random_range(0..pos),
            };
            Some(out[target].tweet_id.clone())
        } else {
            None
        };
        // A retweet quotes its source as "RT @user".
        let mention = d.mention || retweet_of.is_some();

        let signal = c.rating_effect * (f64::from(d.rating) - 5.0)
            + c.metadata_effect
                * ((d.followers as f64).ln_1p() + MENTION_GAIN * f64::from(u8::from(mention)))
            + c.noise * standard.sample(&mut rng);
        let engagement = signal.max(0.0).round() as u64;
        let retweets = (engagement as f64 * rng.random::<f64>()).round() as u64;

        by_item.entry(d.item).or_default().push(pos);
        let user = &users[d.user];
        out.push(Interaction {
            user_id: format!("u{:05}", d.user),
            item_id: format!("tt{:07}", d.item),
            tweet_id: format!("{:0width$}", pos + 1),
            rating: d.rating,
            timestamp: d.timestamp,
            retweet_count: retweets,
            favorite_count: engagement - retweets,
            user_followers: d.followers,
            user_friends: user.friends,
            user_statuses: d.statuses,
            has_mention: mention,
            retweet_of,
        });
    }
    Ok(Dataset::new(format!("synth-{}", c.seed), out))
}
