//! Likelihood scoring of skill candidates.
//!
//! [`ScriptedScorer`] replays committed score tables and drives every test;
//! [`LlmScorer`] reads token log-probabilities from a completions endpoint.

mod llm;
mod scripted;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::planner::SkillInstance;

pub use llm::{
    build_prompt, llm_score, LlmConfig, LlmScorer, ENV_ENDPOINT, ENV_KEY, ENV_MODEL,
    PROMPT_TEMPLATE_ID,
};
pub use scripted::{ScenarioError, ScriptedRow, ScriptedScenario, ScriptedScorer};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRequest {
    pub command: String,
    pub history: Vec<SkillInstance>,
    pub candidates: Vec<SkillInstance>,
}

/// Raw, unnormalized likelihoods keyed by candidate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreResponse {
    pub scores: BTreeMap<SkillInstance, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScorerError {
    #[error("scorer failure: {0}")]
    Failure(String),
    #[error("scorer configuration missing: {0}")]
    ConfigMissing(&'static str),
}

pub trait Scorer: Send + Sync {
    /// Identifier of the prompt template or scenario format behind the scores.
    fn template_id(&self) -> &str;

    fn score(&self, request: &ScoreRequest) -> Result<ScoreResponse, ScorerError>;
}

impl ScoreResponse {
    /// Enforces the response contract against the request that produced it.
    pub fn check(&self, request: &ScoreRequest) -> Result<(), ScorerError> {
        let fail = |m: String| Err(ScorerError::Failure(m));
        if self.scores.len() != request.candidates.len()
            || request.candidates.iter().any(|c| !self.scores.contains_key(c))
        {
            return fail("response keys differ from requested candidates".into());
        }
        if let Some((c, v)) = self.scores.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return fail(format!("score for {c} is {v}"));
        }
        if !self.scores.values().any(|v| *v > 0.0) {
            return fail("all candidate scores are zero".into());
        }
        Ok(())
    }
}

/// Divides each score by the total.
pub fn normalize(response: &ScoreResponse) -> BTreeMap<SkillInstance, f64> {
    let total: f64 = response.scores.values().sum();
    response.scores.iter().map(|(k, v)| (k.clone(), v / total)).collect()
}
