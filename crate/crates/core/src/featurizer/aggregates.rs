use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::dataset::{lower_median, Dataset, Interaction};
use crate::{Error, Result};

use super::friend_ratio;

#[derive(Debug, Clone, PartialEq)]
pub struct UserAggregate {
    /// `(timestamp, rating)` in chronological order.
    history: Vec<(i64, u8)>,
    pub mean_rating: f64,
    pub mean_engagement: f64,
    /// Profile counts from the user's latest training record.
    pub friends: u64,
    pub followers: u64,
    pub statuses: u64,
}

impl UserAggregate {
    /// Lower-middle median of ratings with timestamps strictly before `ts`.
    pub fn prior_median(&self, ts: i64) -> Option<u8> {
        let end = self.history.partition_point(|&(t, _)| t < ts);
        let mut prior: Vec<u8> = self.history[..end].iter().map(|&(_, r)| r).collect();
        prior.sort_unstable();
        lower_median(&prior)
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemAggregate {
    pub mean_engagement: f64,
    pub mean_rating: f64,
    /// Mean friends/followers ratio over the distinct users who rated the item.
    pub mean_friend_ratio: f64,
    /// Mean status count over the distinct users who rated the item.
    pub mean_statuses: f64,
    /// Training retweets whose original tweet concerns the item.
    pub retweet_count: u64,
}

/// Per-user and per-item statistics of the training split.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateStore {
    users: BTreeMap<String, UserAggregate>,
    items: BTreeMap<String, ItemAggregate>,
    retweeted: BTreeSet<String>,
}

impl AggregateStore {
    pub fn user(&self, user_id: &str) -> Option<&UserAggregate> {
        self.users.get(user_id)
    }

    pub fn item(&self, item_id: &str) -> Option<&ItemAggregate> {
        self.items.get(item_id)
    }

    /// Whether some training record is a retweet of `tweet_id`.
    pub fn was_retweeted(&self, tweet_id: &str) -> bool {
        self.retweeted.contains(tweet_id)
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }
}

#[derive(Default)]
struct Running {
    n: usize,
    rating_sum: f64,
    engagement_sum: f64,
}

impl Running {
    fn add(&mut self, t: &Interaction) {
        self.n += 1;
        self.rating_sum += f64::from(t.rating);
        self.engagement_sum += t.engagement() as f64;
    }

    fn means(&self) -> (f64, f64) {
        let n = self.n as f64;
        (self.rating_sum / n, self.engagement_sum / n)
    }
}

pub fn build_aggregates(train: &Dataset) -> Result<AggregateStore> {
    if train.is_empty() {
        return Err(Error::Empty("cannot aggregate an empty training split"));
    }

    let mut user_runs: BTreeMap<&str, Running> = BTreeMap::new();
    let mut item_runs: BTreeMap<&str, Running> = BTreeMap::new();
    let mut latest: HashMap<&str, &Interaction> = HashMap::new();
    let mut raters: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut histories: HashMap<&str, Vec<(i64, &str, u8)>> = HashMap::new();
    let item_of: HashMap<&str, &str> = train
        .iter()
        .map(|t| (t.tweet_id.as_str(), t.item_id.as_str()))
        .collect();
    let mut retweets_per_item: HashMap<&str, u64> = HashMap::new();
    let mut retweeted = BTreeSet::new();

    for t in train.iter() {
        user_runs.entry(&t.user_id).or_default().add(t);
        item_runs.entry(&t.item_id).or_default().add(t);
        raters.entry(&t.item_id).or_default().insert(&t.user_id);
        histories
            .entry(&t.user_id)
            .or_default()
            .push((t.timestamp, &t.tweet_id, t.rating));
        latest
            .entry(&t.user_id)
            .and_modify(|cur| {
                if (t.timestamp, &t.tweet_id) > (cur.timestamp, &cur.tweet_id) {
                    *cur = t;
                }
            })
            .or_insert(t);
        if let Some(original) = &t.retweet_of {
            retweeted.insert(original.clone());
            let item = item_of
                .get(original.as_str())
                .copied()
                .unwrap_or(&t.item_id);
            *retweets_per_item.entry(item).or_default() += 1;
        }
    }

    let users: BTreeMap<String, UserAggregate> = user_runs
        .iter()
        .map(|(&user, run)| {
            let (mean_rating, mean_engagement) = run.means();
            let mut hist = histories.remove(user).unwrap_or_default();
            hist.sort_unstable();
            let profile = latest[user];
            let agg = UserAggregate {
                history: hist.into_iter().map(|(ts, _, r)| (ts, r)).collect(),
                mean_rating,
                mean_engagement,
                friends: profile.user_friends,
                followers: profile.user_followers,
                statuses: profile.user_statuses,
            };
            (user.to_string(), agg)
        })
        .collect();

    let items = item_runs
        .iter()
        .map(|(&item, run)| {
            let (mean_rating, mean_engagement) = run.means();
            let who = &raters[item];
            let k = who.len() as f64;
            let (ratio_sum, status_sum) = who.iter().fold((0.0, 0.0), |(r, s), u| {
                let p = &users[*u];
                (
                    r + friend_ratio(p.friends, p.followers),
                    s + p.statuses as f64,
                )
            });
            let agg = ItemAggregate {
                mean_engagement,
                mean_rating,
                mean_friend_ratio: ratio_sum / k,
                mean_statuses: status_sum / k,
                retweet_count: retweets_per_item.get(item).copied().unwrap_or(0),
            };
            (item.to_string(), agg)
        })
        .collect();

    Ok(AggregateStore {
        users,
        items,
        retweeted,
    })
}
