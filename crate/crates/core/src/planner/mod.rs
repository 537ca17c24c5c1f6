//! Greedy likelihood-driven task planning.
//!
//! Each round grounds the skill set, keeps the admissible candidates, asks the
//! scorer for their likelihoods, and appends the most likely one. Planning
//! stops once `done` wins a round.

mod ambiguity;
mod rules;
mod skill;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use ambiguity::{
    ambiguous_slots, contains_vocabulary, resolve_ambiguity, AnswerProvider, Clarification, Command,
    ScriptedAnswers, Substitution, UnresolvedAmbiguity, AMBIGUOUS_VOCABULARY,
};
pub use rules::{
    admissible_skills, check_trace, extract_objects, is_admissible, PlannerState, SkillSet, OPERATOR,
};
pub use skill::{SkillInstance, SkillName, SkillParseError};

use crate::scorer::{normalize, ScoreRequest, Scorer, ScorerError};

pub const DEFAULT_MAX_STEPS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanStep {
    pub skill: SkillInstance,
    /// Normalized likelihood of every admissible candidate in this round.
    pub scores: BTreeMap<SkillInstance, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanTrace {
    pub command: String,
    pub template: String,
    pub steps: Vec<PlanStep>,
}

impl PlanTrace {
    pub fn new(command: &Command, template: &str) -> Self {
        Self { command: command.resolved.clone(), template: template.to_string(), steps: Vec::new() }
    }

    pub fn skills(&self) -> Vec<SkillInstance> {
        self.steps.iter().map(|s| s.skill.clone()).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.steps.last().is_some_and(|s| s.skill.is_done())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    UnresolvedAmbiguity(#[from] UnresolvedAmbiguity),
    #[error("no admissible candidates")]
    EmptyCandidateSet,
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error("plan did not reach done within {max_steps} steps")]
    PlanTooLong { max_steps: usize, trace: Box<PlanTrace> },
    #[error("max_steps must be at least 1")]
    InvalidMaxSteps,
}

/// Most probable candidate; ties keep the earliest (smallest) one.
fn argmax(dist: &BTreeMap<SkillInstance, f64>) -> Option<&SkillInstance> {
    let mut best: Option<(&SkillInstance, f64)> = None;
    for (c, &p) in dist {
        if best.is_none_or(|(_, bp)| p > bp) {
            best = Some((c, p));
        }
    }
    best.map(|(c, _)| c)
}

/// Scores the admissible candidates and picks the most likely next skill.
pub fn plan_next(
    skills: &SkillSet,
    command: &Command,
    trace: &PlanTrace,
    scorer: &dyn Scorer,
) -> Result<PlanStep, PlanError> {
    let history = trace.skills();
    let state = PlannerState::from_history(&history);
    let candidates = admissible_skills(skills, &history, &state);
    if candidates.is_empty() {
        return Err(PlanError::EmptyCandidateSet);
    }
    let request = ScoreRequest { command: command.resolved.clone(), history, candidates };
    let response = scorer.score(&request)?;
    response.check(&request)?;
    let scores = normalize(&response);
    let skill = argmax(&scores).cloned().ok_or(PlanError::EmptyCandidateSet)?;
    Ok(PlanStep { skill, scores })
}

/// Appends greedy steps until `done` is chosen or `max_steps` rounds pass.
pub fn plan_task(
    skills: &SkillSet,
    command: &Command,
    scorer: &dyn Scorer,
    max_steps: usize,
) -> Result<PlanTrace, PlanError> {
    if max_steps == 0 {
        return Err(PlanError::InvalidMaxSteps);
    }
    let mut trace = PlanTrace::new(command, scorer.template_id());
    for _ in 0..max_steps {
        let step = plan_next(skills, command, &trace, scorer)?;
        let finished = step.skill.is_done();
        trace.steps.push(step);
        if finished {
            return Ok(trace);
        }
    }
    Err(PlanError::PlanTooLong { max_steps, trace: Box::new(trace) })
}
