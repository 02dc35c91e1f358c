//! Region captioning behind a pluggable interface. The default captioner
//! scores labels with the shipped co-occurrence priors; an embedding- or
//! LLM-backed captioner can be substituted.

use crate::fixtures::{self, REGION_VOCABULARY};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CaptionError {
    #[error("captioner failed: {0}")]
    Failed(String),
}

/// Maps member object categories to a top-2 caption distribution whose
/// confidences sum to 1.
pub trait RegionCaptioner {
    fn caption(&self, member_categories: &[String]) -> Result<Vec<(String, f64)>, CaptionError>;
}

/// Deterministic prior captioner: score(label) is the mean over members of
/// P(category | label) from the co-occurrence table; top-2, renormalized.
pub struct PriorCaptioner;

impl RegionCaptioner for PriorCaptioner {
    fn caption(&self, member_categories: &[String]) -> Result<Vec<(String, f64)>, CaptionError> {
        if member_categories.is_empty() {
            return Err(CaptionError::Failed("empty region".into()));
        }
        let table = fixtures::cooccurrence();
        let mut scored: Vec<(&str, f64)> = REGION_VOCABULARY
            .iter()
            .map(|&label| {
                let mean = member_categories
                    .iter()
                    .map(|c| table.prob(label, c))
                    .sum::<f64>()
                    / member_categories.len() as f64;
                (label, mean)
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
        scored.truncate(2);
        let total: f64 = scored.iter().map(|(_, s)| s).sum();
        if total <= 0.0 {
            return Ok(vec![("unknown".to_string(), 1.0)]);
        }
        Ok(scored
            .into_iter()
            .map(|(l, s)| (l.to_string(), s / total))
            .collect())
    }
}

/// Returns a fixed distribution, or fails; for tests and replays.
pub struct ScriptedCaptioner {
    pub result: Result<Vec<(String, f64)>, String>,
}

impl RegionCaptioner for ScriptedCaptioner {
    fn caption(&self, _members: &[String]) -> Result<Vec<(String, f64)>, CaptionError> {
        self.result
            .clone()
            .map_err(CaptionError::Failed)
    }
}
