//! Goal-candidate ledger and verification by majority vote over the top
//! region-context labels.

use crate::fixtures::cooccurrence;
use crate::geom::WorldPoint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("verifier transport failed: {0}")]
    Transport(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerifyState {
    Unverified,
    Accepted,
    Rejected,
}

/// One tracked sighting cluster of the target category.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoalCandidate {
    pub category: String,
    pub position: WorldPoint,
    pub floor: usize,
    pub best_confidence: f64,
    pub sightings: u32,
    pub state: VerifyState,
    pub votes: Vec<bool>,
}

/// One verification query: the candidate plus one region-context label.
#[derive(Debug, Clone)]
pub struct VerifyRequest<'a> {
    pub target: &'a str,
    pub position: WorldPoint,
    pub floor: usize,
    /// Caption label of the containing region; "unknown" when the candidate
    /// has no region yet.
    pub region_label: &'a str,
    pub region_confidence: f64,
}

pub trait GoalVerifier {
    fn vote(&mut self, req: &VerifyRequest) -> Result<bool, VerifyError>;
}

/// Ground-truth object the deterministic verifier checks against.
#[derive(Debug, Clone)]
pub struct TruthObject {
    pub category: String,
    pub position: WorldPoint,
    pub floor: usize,
}

/// Deterministic verifier: the candidate must coincide with a ground-truth
/// object of the target category, and (when the context check is on) sit in
/// a region whose label plausibly contains the target per the co-occurrence
/// priors. Decoy objects fail the first test; miscaptioned or implausible
/// placements fail the second.
pub struct PriorVerifier {
    pub truth: Vec<TruthObject>,
    pub context_check: bool,
    /// Minimum P(target | region label) for a context pass.
    pub context_min: f64,
    /// Position match radius against ground truth, meters.
    pub match_radius: f64,
}

impl PriorVerifier {
    pub fn new(truth: Vec<TruthObject>, context_check: bool) -> Self {
        PriorVerifier { truth, context_check, context_min: 0.01, match_radius: 0.3 }
    }
}

impl GoalVerifier for PriorVerifier {
    fn vote(&mut self, req: &VerifyRequest) -> Result<bool, VerifyError> {
        let category_ok = self.truth.iter().any(|o| {
            o.floor == req.floor
                && o.category == req.target
                && o.position.distance(req.position) <= self.match_radius
        });
        let context_ok = !self.context_check
            || req.region_label == "unknown"
            || cooccurrence().prob(req.region_label, req.target) >= self.context_min;
        Ok(category_ok && context_ok)
    }
}

/// Replays a fixed vote sequence; for tests.
pub struct ScriptedVerifier {
    pub votes: std::collections::VecDeque<Result<bool, String>>,
}

impl GoalVerifier for ScriptedVerifier {
    fn vote(&mut self, _req: &VerifyRequest) -> Result<bool, VerifyError> {
        match self.votes.pop_front() {
            Some(Ok(v)) => Ok(v),
            Some(Err(e)) => Err(VerifyError::Transport(e)),
            None => Err(VerifyError::Transport("vote script exhausted".into())),
        }
    }
}

/// Chat-completion verifier; expects a bare yes/no reply.
pub struct HttpVerifier {
    pub endpoint: String,
    pub model: String,
    pub api_key: String,
    pub timeout_secs: u64,
}

impl GoalVerifier for HttpVerifier {
    fn vote(&mut self, req: &VerifyRequest) -> Result<bool, VerifyError> {
        let prompt = format!(
            "An object detected as '{}' sits at ({:.2}, {:.2}) inside a region \
             captioned '{}' (confidence {:.2}). Is it really a {}? Answer with \
             'yes' or 'no' with no additional text.",
            req.target, req.position.x, req.position.y, req.region_label,
            req.region_confidence, req.target,
        );
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        })
        .to_string();
        let payload = crate::imagine::http_post(
            &self.endpoint,
            &self.api_key,
            self.timeout_secs,
            &body,
        )
        .map_err(VerifyError::Transport)?;
        let v: serde_json::Value = serde_json::from_str(payload.trim())
            .map_err(|e| VerifyError::Transport(e.to_string()))?;
        let content = v["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| VerifyError::Transport("missing content".into()))?;
        Ok(content.trim().to_lowercase().starts_with("yes"))
    }
}

/// Query the verifier once per context label (padded to three with
/// "unknown") and decide by majority. A transport failure on any vote
/// leaves the candidate Unverified.
pub fn run_votes(
    verifier: &mut dyn GoalVerifier,
    target: &str,
    candidate: &GoalCandidate,
    context: &[(String, f64)],
) -> Result<(VerifyState, Vec<bool>), VerifyError> {
    let mut votes = Vec::with_capacity(3);
    for i in 0..3 {
        let (label, conf) = context
            .get(i)
            .map(|(l, c)| (l.as_str(), *c))
            .unwrap_or(("unknown", 0.0));
        let req = VerifyRequest {
            target,
            position: candidate.position,
            floor: candidate.floor,
            region_label: label,
            region_confidence: conf,
        };
        votes.push(verifier.vote(&req)?);
    }
    let yes = votes.iter().filter(|&&v| v).count();
    let state = if yes >= 2 { VerifyState::Accepted } else { VerifyState::Rejected };
    Ok((state, votes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    fn candidate() -> GoalCandidate {
        GoalCandidate {
            category: "bed".into(),
            position: WorldPoint::new(1.0, 1.0),
            floor: 0,
            best_confidence: 0.9,
            sightings: 3,
            state: VerifyState::Unverified,
            votes: Vec::new(),
        }
    }

    fn truth_bed() -> Vec<TruthObject> {
        vec![TruthObject { category: "bed".into(), position: WorldPoint::new(1.0, 1.0), floor: 0 }]
    }

    #[test]
    fn true_candidate_in_consistent_region_accepted() {
        let mut v = PriorVerifier::new(truth_bed(), true);
        let ctx = vec![("bedroom".to_string(), 0.8), ("living room".to_string(), 0.2)];
        let (state, votes) = run_votes(&mut v, "bed", &candidate(), &ctx).unwrap();
        // Beds never co-occur with living rooms, so the second vote fails;
        // the bedroom vote and the "unknown" padding vote carry the majority.
        assert_eq!(state, VerifyState::Accepted);
        assert_eq!(votes, vec![true, false, true]);
    }

    #[test]
    fn decoy_rejected_by_ground_truth() {
        // A sofa detected as a bed: no ground-truth bed at the position.
        let truth = vec![TruthObject {
            category: "sofa".into(),
            position: WorldPoint::new(1.0, 1.0),
            floor: 0,
        }];
        let mut v = PriorVerifier::new(truth, false);
        let ctx = vec![("bedroom".to_string(), 1.0)];
        let (state, _) = run_votes(&mut v, "bed", &candidate(), &ctx).unwrap();
        assert_eq!(state, VerifyState::Rejected);
    }

    #[test]
    fn context_check_rejects_implausible_region() {
        let mut with = PriorVerifier::new(truth_bed(), true);
        let mut without = PriorVerifier::new(truth_bed(), false);
        // A bed captioned as sitting in a bathroom is implausible.
        let ctx = vec![
            ("bathroom".to_string(), 0.7),
            ("bathroom".to_string(), 0.2),
            ("bathroom".to_string(), 0.1),
        ];
        let (s1, _) = run_votes(&mut with, "bed", &candidate(), &ctx).unwrap();
        let (s2, _) = run_votes(&mut without, "bed", &candidate(), &ctx).unwrap();
        assert_eq!(s1, VerifyState::Rejected);
        assert_eq!(s2, VerifyState::Accepted);
    }

    #[test]
    fn majority_two_of_three_accepts() {
        let mut v = ScriptedVerifier {
            votes: VecDeque::from([Ok(true), Ok(false), Ok(true)]),
        };
        let (state, votes) = run_votes(&mut v, "bed", &candidate(), &[]).unwrap();
        assert_eq!(state, VerifyState::Accepted);
        assert_eq!(votes, vec![true, false, true]);
    }

    #[test]
    fn transport_failure_leaves_unverified() {
        let mut v = ScriptedVerifier {
            votes: VecDeque::from([Ok(true), Err("timeout".to_string())]),
        };
        let r = run_votes(&mut v, "bed", &candidate(), &[]);
        assert!(matches!(r, Err(VerifyError::Transport(_))));
    }
}
