//! Feature matrices in the svmlight-style learning-to-rank text format:
//!
//! ```text
//! <label> qid:<user-ordinal> 1:<F1> 2:<F2> ... 16:<F16> # <tweet_id>
//! ```
//!
//! User ordinals are 1-based positions of the query groups. Values carry six
//! decimals.

use std::io::{BufRead, Write};

use crate::{Error, Result};

use super::{FeatureVector, QueryGroup, NUM_FEATURES};

fn fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

pub fn write_letor<W: Write>(groups: &[QueryGroup], mut out: W) -> Result<()> {
    for (ordinal, g) in groups.iter().enumerate() {
        for e in &g.entries {
            write!(out, "{} qid:{}", e.label, ordinal + 1)?;
            for (j, v) in e.features.0.iter().enumerate() {
                write!(out, " {}:{}", j + 1, fixed6(*v))?;
            }
            writeln!(out, " # {}", e.tweet_id)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LetorRow {
    pub label: u32,
    pub qid: usize,
    pub features: FeatureVector,
    pub tweet_id: String,
}

pub fn read_letor<R: BufRead>(input: R) -> Result<Vec<LetorRow>> {
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(parse_line(&line).map_err(|message| Error::FeatureLine {
            line: idx + 1,
            message,
        })?);
    }
    Ok(rows)
}

fn parse_line(line: &str) -> std::result::Result<LetorRow, String> {
    let (body, comment) = line
        .split_once(" # ")
        .ok_or("missing `# <tweet_id>` comment")?;
    let mut tokens = body.split(' ');
    let label = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or("bad label")?;
    let qid = tokens
        .next()
        .and_then(|t| t.strip_prefix("qid:"))
        .and_then(|t| t.parse().ok())
        .ok_or("bad qid")?;
    let mut features = [0.0; NUM_FEATURES];
    let mut count = 0;
    for (expected, token) in (1..).zip(tokens) {
        let (index, value) = token
            .split_once(':')
            .ok_or_else(|| format!("bad pair `{token}`"))?;
        if index.parse::<usize>().ok() != Some(expected) || expected > NUM_FEATURES {
            return Err(format!("expected feature {expected}, found `{token}`"));
        }
        features[expected - 1] = value.parse().map_err(|_| format!("bad value `{value}`"))?;
        count += 1;
    }
    if count != NUM_FEATURES {
        return Err(format!("expected {NUM_FEATURES} features, found {count}"));
    }
    Ok(LetorRow {
        label,
        qid,
        features: FeatureVector(features),
        tweet_id: comment.trim().to_string(),
    })
}
