//! JSON model documents:
//!
//! ```text
//! {"format_version": 1, "params": {...}, "normalizer": {"mean": [...], "std": [...]},
//!  "members": [{"role": "lambdamart", "weight": 1.0, "base_score": 0.0,
//!               "shrinkage": 0.1, "trees": [[{"kind": "leaf", "value": 0.5}], ...]}]}
//! ```
//!
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! loaded model reproduces every score bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::featurizer::{FeatureVector, Normalizer};
use crate::trees::RegressionTree;
use crate::{Error, Result};

use super::{BlendMember, BoostParams, LinearBlend, Role, TreeEnsemble};

pub const FORMAT_VERSION: u32 = 1;

/// A trained blend together with the settings and normalisation it was
/// trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingModel {
    pub params: BoostParams,
    pub normalizer: Normalizer,
    pub blend: LinearBlend,
}

#[derive(Serialize, Deserialize)]
struct Document {
    format_version: u32,
    params: BoostParams,
    normalizer: Normalizer,
    members: Vec<MemberDocument>,
}

#[derive(Serialize, Deserialize)]
struct MemberDocument {
    role: Role,
    weight: f64,
    base_score: f64,
    shrinkage: f64,
    trees: Vec<RegressionTree>,
}

impl RankingModel {
    /// Score of a raw feature vector: normalised, then blended.
    pub fn score_raw(&self, raw: &FeatureVector) -> f64 {
        self.blend.score(&self.normalizer.apply(raw))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = Document {
            format_version: FORMAT_VERSION,
            params: self.params,
            normalizer: self.normalizer.clone(),
            members: self
                .blend
                .members()
                .iter()
                .map(|m| MemberDocument {
                    role: m.role,
                    weight: m.weight,
                    base_score: m.ensemble.base_score,
                    shrinkage: m.ensemble.shrinkage,
                    trees: m.ensemble.trees.clone(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        Ok(text)
    }

    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_json()?.as_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let found = value
            .get("format_version")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidModel("missing format_version".into()))?;
        if found != u64::from(FORMAT_VERSION) {
            return Err(Error::FormatVersion {
                found: u32::try_from(found).unwrap_or(u32::MAX),
                expected: FORMAT_VERSION,
            });
        }
        let doc: Document = serde_json::from_value(value)?;
        doc.params.validate()?;
        let members = doc
            .members
            .into_iter()
            .map(|m| BlendMember {
                role: m.role,
                weight: m.weight,
                ensemble: TreeEnsemble {
                    trees: m.trees,
                    shrinkage: m.shrinkage,
                    base_score: m.base_score,
                },
            })
            .collect();
        Ok(Self {
            params: doc.params,
            normalizer: doc.normalizer,
            blend: LinearBlend::new(members)?,
        })
    }

    pub fn load<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        Self::from_json(&text)
    }
}
