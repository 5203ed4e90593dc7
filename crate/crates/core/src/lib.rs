//! Collaborative ranking of tweets by predicted user engagement.
//!
//! Users play the role of queries and their rating tweets the role of
//! documents. Each user-item-tweet triple is turned into a 16-dimensional
//! feature vector, and a linear blend of a pointwise MART ensemble and a
//! LambdaMART ensemble (which optimises nDCG@10 directly) ranks each
//! user's tweets by expected engagement (retweets plus favorites).
//!
//! The modules follow the batch pipeline:
//!
//! * [`dataset`]: line-delimited JSON ingestion, chronological splits and
//!   descriptive statistics.
//! * [`featurizer`]: training-split aggregates, feature extraction,
//!   z-score normalisation and outlier pruning.
//! * [`metrics`]: DCG@K / nDCG@K and per-user averaging.
//! * [`trees`]: least-squares regression trees grown best-first to a leaf
//!   budget.
//! * [`ranker`]: MART, LambdaMART, blending and the model file.
//! * [`baselines`]: rating, historical item engagement and random scorers.
//! * [`synthgen`]: seeded synthetic datasets.
//! * [`pipeline`]: the end-to-end train and evaluate flows shared by the CLI.

pub mod baselines;
pub mod cli;
pub mod dataset;
mod error;
pub mod featurizer;
pub mod metrics;
pub mod pipeline;
pub mod ranker;
pub mod synthgen;
pub mod trees;

pub use error::{Error, Result};
