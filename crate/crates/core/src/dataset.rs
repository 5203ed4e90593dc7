//! Tweet-interaction records: ingestion, chronological splitting and the
//! descriptive statistics of a split.
//!
//! Input is UTF-8 line-delimited JSON with one flat object per line:
//!
//! ```text
//! {"user_id":"u1","item_id":"tt0111161","tweet_id":"t1","rating":9,
//!  "timestamp":1362062580,"retweet_count":2,"favorite_count":1,
//!  "user_followers":120,"user_friends":80,"user_statuses":3400,
//!  "has_mention":false,"retweeted_status_id":null}
//! ```
//!
//! `retweeted_status_id` is optional; every other key is required.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::{Error, Result};

pub const MAX_RATING: u8 = 10;

const REQUIRED_FIELDS: [&str; 11] = [
    "user_id",
    "item_id",
    "tweet_id",
    "rating",
    "timestamp",
    "retweet_count",
    "favorite_count",
    "user_followers",
    "user_friends",
    "user_statuses",
    "has_mention",
];

/// One user-item-tweet triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interaction {
    pub user_id: String,
    pub item_id: String,
    pub tweet_id: String,
    pub rating: u8,
    pub timestamp: i64,
    pub retweet_count: u64,
    pub favorite_count: u64,
    pub user_followers: u64,
    pub user_friends: u64,
    pub user_statuses: u64,
    pub has_mention: bool,
    #[serde(rename = "retweeted_status_id")]
    pub retweet_of: Option<String>,
}

impl Interaction {
    /// Retweets plus favorites; the relevance label of the triple.
    pub fn engagement(&self) -> u64 {
        self.retweet_count + self.favorite_count
    }

    pub fn is_retweet(&self) -> bool {
        self.retweet_of.is_some()
    }
}

/// Whether tweet text contains a mention: an `@` directly followed by a
/// username character (ASCII alphanumeric or underscore).
pub fn contains_mention(text: &str) -> bool {
    let bytes = text.as_bytes();
    bytes
        .windows(2)
        .any(|w| w[0] == b'@' && (w[1].is_ascii_alphanumeric() || w[1] == b'_'))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    pub interactions: Vec<Interaction>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, interactions: Vec<Interaction>) -> Self {
        Self {
            name: name.into(),
            interactions,
        }
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interaction> {
        self.interactions.iter()
    }

    /// Distinct user ids in order of first appearance.
    pub fn users(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.interactions
            .iter()
            .filter(|t| seen.insert(t.user_id.as_str()))
            .map(|t| t.user_id.as_str())
            .collect()
    }

    /// Same records, ordered by `(timestamp, tweet_id)`.
    pub fn sorted_chronologically(mut self) -> Self {
        self.interactions
            .sort_by(|a, b| (a.timestamp, &a.tweet_id).cmp(&(b.timestamp, &b.tweet_id)));
        self
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for t in &self.interactions {
            serde_json::to_writer(&mut out, t)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Parses line-delimited JSON records, preserving input order. Blank lines
/// are skipped; line numbers in errors are 1-based.
pub fn parse_tweets<R: BufRead>(name: &str, input: R) -> Result<Dataset> {
    let mut interactions = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(line_no, &line)?;
        if !seen.insert(record.tweet_id.clone()) {
            return Err(Error::DuplicateTweet {
                line: line_no,
                tweet_id: record.tweet_id,
            });
        }
        interactions.push(record);
    }
    Ok(Dataset::new(name, interactions))
}

pub fn parse_tweets_str(name: &str, input: &str) -> Result<Dataset> {
    parse_tweets(name, input.as_bytes())
}

fn parse_record(line: usize, text: &str) -> Result<Interaction> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    let Value::Object(obj) = value else {
        return Err(Error::Parse {
            line,
            message: "expected a JSON object".into(),
        });
    };
    if let Some(missing) = REQUIRED_FIELDS.iter().find(|f| !obj.contains_key(**f)) {
        return Err(schema(line, missing, "missing required field"));
    }
    let fields = Fields { line, obj: &obj };

    let rating = fields.count("rating")?;
    if rating > u64::from(MAX_RATING) {
        return Err(schema(line, "rating", "must be within 0..=10"));
    }
    let tweet_id = fields.id("tweet_id")?;
    let retweet_of = match obj.get("retweeted_status_id") {
        None | Some(Value::Null) => None,
        Some(_) => Some(fields.id("retweeted_status_id")?),
    };
    if retweet_of.as_deref() == Some(tweet_id.as_str()) {
        return Err(schema(
            line,
            "retweeted_status_id",
            "a tweet cannot be a retweet of itself",
        ));
    }

    Ok(Interaction {
        user_id: fields.id("user_id")?,
        item_id: fields.id("item_id")?,
        tweet_id,
        rating: rating as u8,
        timestamp: fields.timestamp("timestamp")?,
        retweet_count: fields.count("retweet_count")?,
        favorite_count: fields.count("favorite_count")?,
        user_followers: fields.count("user_followers")?,
        user_friends: fields.count("user_friends")?,
        user_statuses: fields.count("user_statuses")?,
        has_mention: fields.flag("has_mention")?,
        retweet_of,
    })
}

fn schema(line: usize, field: &str, message: &str) -> Error {
    Error::Schema {
        line,
        field: field.to_string(),
        message: message.to_string(),
    }
}

struct Fields<'a> {
    line: usize,
    obj: &'a Map<String, Value>,
}

impl Fields<'_> {
    /// Ids are opaque strings; bare integers are accepted and kept in
    /// their decimal form.
    fn id(&self, key: &str) -> Result<String> {
        match &self.obj[key] {
            Value::String(s) if !s.is_empty() => Ok(s.clone()),
            Value::Number(n) if n.is_u64() || n.is_i64() => Ok(n.to_string()),
            _ => Err(schema(self.line, key, "expected a non-empty string id")),
        }
    }

    fn count(&self, key: &str) -> Result<u64> {
        self.obj[key]
            .as_u64()
            .ok_or_else(|| schema(self.line, key, "expected a non-negative integer"))
    }

    fn timestamp(&self, key: &str) -> Result<i64> {
        self.obj[key]
            .as_i64()
            .ok_or_else(|| schema(self.line, key, "expected integer seconds since epoch"))
    }

    fn flag(&self, key: &str) -> Result<bool> {
        self.obj[key]
            .as_bool()
            .ok_or_else(|| schema(self.line, key, "expected a boolean"))
    }
}

/// Fractions of a three-way chronological split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions(pub [f64; 3]);

impl Default for SplitFractions {
    fn default() -> Self {
        Self([0.8, 0.1, 0.1])
    }
}

impl SplitFractions {
    fn validate(&self) -> Result<()> {
        if self.0.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidFractions(format!(
                "{:?}: every fraction must be positive",
                self.0
            )));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidFractions(format!(
                "{:?} sums to {sum}, expected 1.0",
                self.0
            )));
        }
        Ok(())
    }
}

/// Number of leading records that a fraction of `n` covers. The small
/// offset keeps products such as `0.29 * 100` from flooring one short.
pub(crate) fn floor_share(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64 + 1e-9).floor() as usize).min(n)
}

/// Splits into `(train, test, eval)` after ordering by `(timestamp,
/// tweet_id)`. The first two sizes are `floor(fraction * n)`; the last
/// split takes the remainder.
pub fn chronological_split(
    d: &Dataset,
    fractions: SplitFractions,
) -> Result<(Dataset, Dataset, Dataset)> {
    if d.is_empty() {
        return Err(Error::Empty("cannot split an empty dataset"));
    }
    fractions.validate()?;
    let n = d.len();
    let n_train = floor_share(fractions.0[0], n);
    let n_test = floor_share(fractions.0[1], n).min(n - n_train);

    let mut sorted = d.clone().sorted_chronologically().interactions;
    let eval = sorted.split_off(n_train + n_test);
    let test = sorted.split_off(n_train);
    Ok((
        Dataset::new(format!("{}-train", d.name), sorted),
        Dataset::new(format!("{}-test", d.name), test),
        Dataset::new(format!("{}-eval", d.name), eval),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub user_count: usize,
    pub item_count: usize,
    pub tweet_count: usize,
    pub min_per_user: usize,
    pub max_per_user: usize,
    pub mean_per_user: f64,
    /// Lower-middle element for an even number of users.
    pub median_per_user: usize,
    pub first_timestamp: i64,
    pub last_timestamp: i64,
}

impl StatsReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.serialize(self)?;
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "users={} items={} tweets={} per_user(min={} median={} mean={:.2} max={}) time=[{}, {}]",
            self.user_count,
            self.item_count,
            self.tweet_count,
            self.min_per_user,
            self.median_per_user,
            self.mean_per_user,
            self.max_per_user,
            self.first_timestamp,
            self.last_timestamp
        )
    }
}

/// Lower-middle median of an already sorted slice.
pub(crate) fn lower_median<T: Copy>(sorted: &[T]) -> Option<T> {
    if sorted.is_empty() {
        None
    } else {
        Some(sorted[(sorted.len() - 1) / 2])
    }
}

pub fn interaction_stats(d: &Dataset) -> Result<StatsReport> {
    if d.is_empty() {
        return Err(Error::Empty("no interactions to summarise"));
    }
    let mut per_user: HashMap<&str, usize> = HashMap::new();
    let mut items = BTreeSet::new();
    for t in d.iter() {
        *per_user.entry(&t.user_id).or_default() += 1;
        items.insert(t.item_id.as_str());
    }
    let mut counts: Vec<usize> = per_user.into_values().collect();
    counts.sort_unstable();
    let (first_timestamp, last_timestamp) = d.iter().fold((i64::MAX, i64::MIN), |(lo, hi), t| {
        (lo.min(t.timestamp), hi.max(t.timestamp))
    });

    Ok(StatsReport {
        user_count: counts.len(),
        item_count: items.len(),
        tweet_count: d.len(),
        min_per_user: counts[0],
        max_per_user: counts[counts.len() - 1],
        mean_per_user: d.len() as f64 / counts.len() as f64,
        median_per_user: lower_median(&counts).unwrap_or(0),
        first_timestamp,
        last_timestamp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HistogramRow {
    pub rating: u8,
    pub engagement: u64,
    pub frequency: u64,
}

/// Frequency of every observed `(rating, engagement)` pair, ascending.
pub fn rating_engagement_histogram(d: &Dataset) -> Vec<HistogramRow> {
    let mut counts: BTreeMap<(u8, u64), u64> = BTreeMap::new();
    for t in d.iter() {
        *counts.entry((t.rating, t.engagement())).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|((rating, engagement), frequency)| HistogramRow {
            rating,
            engagement,
            frequency,
        })
        .collect()
}

pub fn write_histogram_csv<W: Write>(rows: &[HistogramRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(["rating", "engagement", "frequency"])?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn record(user: &str, item: &str, tweet: &str, rating: u8, ts: i64) -> Interaction {
        Interaction {
            user_id: user.into(),
            item_id: item.into(),
            tweet_id: tweet.into(),
            rating,
            timestamp: ts,
            retweet_count: 0,
            favorite_count: 0,
            user_followers: 100,
            user_friends: 50,
            user_statuses: 1000,
            has_mention: false,
            retweet_of: None,
        }
    }

    const LINE: &str = r#"{"user_id":"u1","item_id":"i1","tweet_id":"t1","rating":8,"timestamp":100,"retweet_count":2,"favorite_count":1,"user_followers":10,"user_friends":5,"user_statuses":7,"has_mention":true}"#;

    #[test]
    fn engagement_is_sum_of_counts() {
        let d = parse_tweets_str("x", LINE).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.interactions[0].engagement(), 3);
        assert_eq!(d.interactions[0].retweet_of, None);
        assert!(d.interactions[0].has_mention);
    }

    #[test]
    fn missing_rating_names_the_field() {
        let line = LINE.replace(r#""rating":8,"#, "");
        match parse_tweets_str("x", &line) {
            Err(Error::Schema { line: 1, field, .. }) => assert_eq!(field, "rating"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_carries_line_number() {
        let input = format!("{LINE}\n{{not json\n");
        assert!(matches!(
            parse_tweets_str("x", &input),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_tweet_rejected() {
        let input = format!("{LINE}\n{LINE}\n");
        assert!(matches!(
            parse_tweets_str("x", &input),
            Err(Error::DuplicateTweet { line: 2, .. })
        ));
    }

    #[test]
    fn out_of_range_rating_and_self_retweet_rejected() {
        let high = LINE.replace(r#""rating":8"#, r#""rating":11"#);
        assert!(matches!(
            parse_tweets_str("x", &high),
            Err(Error::Schema { .. })
        ));
        let selfrt = LINE.replace('}', r#","retweeted_status_id":"t1"}"#);
        assert!(matches!(
            parse_tweets_str("x", &selfrt),
            Err(Error::Schema { .. })
        ));
        let neg = LINE.replace(r#""retweet_count":2"#, r#""retweet_count":-2"#);
        assert!(matches!(
            parse_tweets_str("x", &neg),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn retweet_and_numeric_ids() {
        let line = LINE
            .replace(r#""tweet_id":"t1""#, r#""tweet_id":42"#)
            .replace('}', r#","retweeted_status_id":"t0"}"#);
        let d = parse_tweets_str("x", &line).unwrap();
        assert_eq!(d.interactions[0].tweet_id, "42");
        assert_eq!(d.interactions[0].retweet_of.as_deref(), Some("t0"));
    }

    #[test]
    fn mention_detection() {
        assert!(contains_mention("great film @imdb"));
        assert!(contains_mention("@_x"));
        assert!(!contains_mention("mail me at @ home"));
        assert!(!contains_mention("no mentions"));
    }

    #[test]
    fn split_sizes_floor() {
        let recs = (0..10)
            .map(|i| record("u", "i", &format!("t{i}"), 5, i))
            .collect();
        let (tr, te, ev) =
            chronological_split(&Dataset::new("d", recs), SplitFractions::default()).unwrap();
        assert_eq!((tr.len(), te.len(), ev.len()), (8, 1, 1));
    }

    #[test]
    fn split_sizes_match_full_corpus_counts() {
        let n = 212_857;
        assert_eq!(floor_share(0.8, n), 170_285);
        assert_eq!(floor_share(0.1, n), 21_285);
        assert_eq!(n - 170_285 - 21_285, 21_287);
    }

    #[test]
    fn split_ties_ordered_by_tweet_id() {
        let recs = vec![
            record("u", "i", "b", 5, 7),
            record("u", "i", "a", 5, 7),
            record("u", "i", "c", 5, 1),
        ];
        let d = Dataset::new("d", recs);
        let (tr, _, _) = chronological_split(&d, SplitFractions([0.99, 0.005, 0.005])).unwrap();
        let ids: Vec<_> = tr.iter().map(|t| t.tweet_id.as_str()).collect();
        assert_eq!(ids, ["c", "a"]);
        let sorted = d.sorted_chronologically();
        let ids: Vec<_> = sorted.iter().map(|t| t.tweet_id.as_str()).collect();
        assert_eq!(ids, ["c", "a", "b"]);
    }

    #[test]
    fn split_rejects_bad_input() {
        let d = Dataset::new("d", vec![record("u", "i", "t", 5, 1)]);
        assert!(chronological_split(&Dataset::default(), SplitFractions::default()).is_err());
        assert!(matches!(
            chronological_split(&d, SplitFractions([0.8, 0.1, 0.2])),
            Err(Error::InvalidFractions(_))
        ));
        assert!(chronological_split(&d, SplitFractions([1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn stats_hand_count() {
        let d = Dataset::new(
            "d",
            vec![
                record("a", "i1", "t1", 5, 1),
                record("a", "i2", "t2", 5, 2),
                record("a", "i1", "t3", 5, 3),
                record("b", "i3", "t4", 5, 9),
            ],
        );
        let s = interaction_stats(&d).unwrap();
        assert_eq!(s.mean_per_user, 2.0);
        assert_eq!(s.median_per_user, 1);
        assert_eq!(s.max_per_user, 3);
        assert_eq!(s.min_per_user, 1);
        assert_eq!((s.user_count, s.item_count, s.tweet_count), (2, 3, 4));
        assert_eq!((s.first_timestamp, s.last_timestamp), (1, 9));
    }

    #[test]
    fn stats_single_and_empty() {
        let d = Dataset::new("d", vec![record("a", "i", "t", 5, 1)]);
        let s = interaction_stats(&d).unwrap();
        assert_eq!(
            (s.min_per_user, s.max_per_user, s.median_per_user),
            (1, 1, 1)
        );
        assert_eq!(s.mean_per_user, 1.0);
        assert!(interaction_stats(&Dataset::default()).is_err());
    }

    #[test]
    fn histogram_hand_count() {
        let mut r1 = record("a", "i", "t1", 8, 1);
        let r2 = record("a", "i", "t2", 8, 2);
        let mut r3 = record("a", "i", "t3", 9, 3);
        r3.favorite_count = 1;
        r1.retweet_count = 0;
        let rows = rating_engagement_histogram(&Dataset::new("d", vec![r1, r2, r3]));
        let got: Vec<_> = rows
            .iter()
            .map(|r| (r.rating, r.engagement, r.frequency))
            .collect();
        assert_eq!(got, [(8, 0, 2), (9, 1, 1)]);
        assert!(rating_engagement_histogram(&Dataset::default()).is_empty());
    }

    #[test]
    fn histogram_csv_format() {
        let rows = [HistogramRow {
            rating: 8,
            engagement: 0,
            frequency: 2,
        }];
        let mut buf = Vec::new();
        write_histogram_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "rating,engagement,frequency\n8,0,2\n"
        );
    }
}
