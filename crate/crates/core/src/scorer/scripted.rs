use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ScoreRequest, ScoreResponse, Scorer, ScorerError};
use crate::planner::SkillInstance;

/// One score table, used when the history has exactly `history` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedRow {
    pub history: usize,
    pub scores: BTreeMap<SkillInstance, f64>,
}

/// Committed score tables for one command.
///
/// Candidates missing from a row score `default_score`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedScenario {
    pub command: String,
    #[serde(default)]
    pub default_score: f64,
    pub rows: Vec<ScriptedRow>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario rows must cover history lengths 0..N in order; row {index} has {found}")]
    NonContiguous { index: usize, found: usize },
    #[error("scenario score for {0} must be finite and nonnegative")]
    BadScore(String),
}

impl ScriptedScenario {
    pub fn from_json(doc: &str) -> Result<Self, ScenarioError> {
        let scenario: Self =
            serde_json::from_str(doc).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (index, row) in self.rows.iter().enumerate() {
            if row.history != index {
                return Err(ScenarioError::NonContiguous { index, found: row.history });
            }
            if let Some((c, _)) = row.scores.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
                return Err(ScenarioError::BadScore(c.to_string()));
            }
        }
        if !self.default_score.is_finite() || self.default_score < 0.0 {
            return Err(ScenarioError::BadScore("default_score".into()));
        }
        Ok(())
    }
}

/// Deterministic scorer: the response depends only on the history length.
#[derive(Debug, Clone)]
pub struct ScriptedScorer {
    scenario: ScriptedScenario,
}

impl ScriptedScorer {
    pub const TEMPLATE_ID: &'static str = "scripted-v1";

    pub fn new(scenario: ScriptedScenario) -> Result<Self, ScenarioError> {
        scenario.validate()?;
        Ok(Self { scenario })
    }

    pub fn from_json(doc: &str) -> Result<Self, ScenarioError> {
        Ok(Self { scenario: ScriptedScenario::from_json(doc)? })
    }

    pub fn scenario(&self) -> &ScriptedScenario {
        &self.scenario
    }
}

impl Scorer for ScriptedScorer {
    fn template_id(&self) -> &str {
        Self::TEMPLATE_ID
    }

    fn score(&self, request: &ScoreRequest) -> Result<ScoreResponse, ScorerError> {
        let row = self.scenario.rows.get(request.history.len()).ok_or_else(|| {
            ScorerError::Failure(format!(
                "scenario exhausted: no row for history length {}",
                request.history.len()
            ))
        })?;
        let scores = request
            .candidates
            .iter()
            .map(|c| (c.clone(), row.scores.get(c).copied().unwrap_or(self.scenario.default_score)))
            .collect();
        Ok(ScoreResponse { scores })
    }
}
