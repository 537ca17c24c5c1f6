use std::env;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ScoreRequest, ScoreResponse, Scorer, ScorerError};
use crate::planner::SkillInstance;

pub const ENV_ENDPOINT: &str = "SEMPLAN_LLM_ENDPOINT";
pub const ENV_KEY: &str = "SEMPLAN_LLM_KEY";
pub const ENV_MODEL: &str = "SEMPLAN_LLM_MODEL";

/// Version tag of [`build_prompt`]; bump whenever the template text changes.
pub const PROMPT_TEMPLATE_ID: &str = "semplan-saycan-v1";

#[derive(Debug, Clone)]
pub struct LlmConfig {
    pub endpoint: Option<String>,
    pub api_key: Option<String>,
    pub model: Option<String>,
    /// Concurrent candidate requests per scoring round.
    pub max_in_flight: usize,
    /// Total attempts per candidate, including the first.
    pub max_attempts: u32,
    /// Delay before the first retry; doubles for each further retry.
    pub backoff_base: Duration,
    pub timeout: Duration,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            api_key: None,
            model: None,
            max_in_flight: 4,
            max_attempts: 3,
            backoff_base: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
        }
    }
}

impl LlmConfig {
    pub fn from_env() -> Self {
        let var = |k| env::var(k).ok().filter(|v: &String| !v.trim().is_empty());
        Self { endpoint: var(ENV_ENDPOINT), api_key: var(ENV_KEY), model: var(ENV_MODEL), ..Self::default() }
    }

    fn resolved(&self) -> Result<(&str, &str, &str), ScorerError> {
        let endpoint = self.endpoint.as_deref().ok_or(ScorerError::ConfigMissing(ENV_ENDPOINT))?;
        let key = self.api_key.as_deref().ok_or(ScorerError::ConfigMissing(ENV_KEY))?;
        let model = self.model.as_deref().ok_or(ScorerError::ConfigMissing(ENV_MODEL))?;
        Ok((endpoint, key, model))
    }

    pub fn completions_url(endpoint: &str) -> String {
        format!("{}/v1/completions", endpoint.trim_end_matches('/'))
    }
}

/// Prompt prefix shared by all candidates of one scoring round. The candidate
/// text is appended directly after it.
pub fn build_prompt(command: &str, history: &[SkillInstance]) -> String {
    let mut prompt = String::from(
        "Robot: I am a home service robot. My skills are move_to(location), find_obj(object), \
         grasp(object), place(location), handover, answer(object), follow_person, and done.\n",
    );
    prompt.push_str(&format!("Human: {command}\n"));
    prompt.push_str("Robot: I will do the following steps.\n");
    for (i, step) in history.iter().enumerate() {
        prompt.push_str(&format!("{}. {step}\n", i + 1));
    }
    prompt.push_str(&format!("{}. ", history.len() + 1));
    prompt
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: String,
    max_tokens: u32,
    echo: bool,
    logprobs: bool,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    logprobs: Logprobs,
}

#[derive(Deserialize)]
struct Logprobs {
    tokens: Vec<String>,
    token_logprobs: Vec<Option<f64>>,
    text_offset: Vec<usize>,
}

/// Sums the logprobs of every token that overlaps the text after `prefix_chars`.
fn continuation_logprob(body: &str, prefix_chars: usize) -> Result<f64, ScorerError> {
    let malformed = |m: &str| ScorerError::Failure(format!("malformed completion reply: {m}"));
    let reply: CompletionResponse =
        serde_json::from_str(body).map_err(|e| malformed(&e.to_string()))?;
    let lp = reply.choices.into_iter().next().ok_or_else(|| malformed("no choices"))?.logprobs;
    if lp.tokens.len() != lp.token_logprobs.len() || lp.tokens.len() != lp.text_offset.len() {
        return Err(malformed("token arrays differ in length"));
    }
    let mut total = 0.0;
    let mut counted = 0;
    for ((token, logprob), offset) in lp.tokens.iter().zip(&lp.token_logprobs).zip(&lp.text_offset) {
        if offset + token.chars().count() <= prefix_chars {
            continue;
        }
        let logprob = logprob.ok_or_else(|| malformed("continuation token without logprob"))?;
        if !logprob.is_finite() {
            return Err(malformed("non-finite logprob"));
        }
        total += logprob;
        counted += 1;
    }
    if counted == 0 {
        return Err(malformed("no continuation tokens"));
    }
    Ok(total)
}

enum Attempt {
    Done(String),
    Transient(String),
    Fatal(String),
}

fn post_once(agent: &ureq::Agent, url: &str, key: &str, body: &CompletionRequest) -> Attempt {
    let payload = match serde_json::to_string(body) {
        Ok(p) => p,
        Err(e) => return Attempt::Fatal(e.to_string()),
    };
    let sent = agent
        .post(url)
        .set("Authorization", &format!("Bearer {key}"))
        .set("Content-Type", "application/json")
        .send_string(&payload);
    match sent {
        Ok(resp) => match resp.into_string() {
            Ok(text) => Attempt::Done(text),
            Err(e) => Attempt::Transient(e.to_string()),
        },
        Err(ureq::Error::Status(code, _)) if code == 429 || code >= 500 => {
            Attempt::Transient(format!("HTTP {code}"))
        }
        Err(ureq::Error::Status(code, _)) => Attempt::Fatal(format!("HTTP {code}")),
        Err(ureq::Error::Transport(t)) => Attempt::Transient(t.to_string()),
    }
}

fn score_candidate(
    agent: &ureq::Agent,
    config: &LlmConfig,
    (url, key, model): (&str, &str, &str),
    prefix: &str,
    candidate: &SkillInstance,
) -> Result<f64, ScorerError> {
    let body = CompletionRequest {
        model,
        prompt: format!("{prefix}{candidate}"),
        max_tokens: 0,
        echo: true,
        logprobs: true,
    };
    let attempts = config.max_attempts.max(1);
    let mut last = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            thread::sleep(config.backoff_base * 2u32.pow(attempt - 1));
        }
        match post_once(agent, url, key, &body) {
            Attempt::Done(text) => {
                return continuation_logprob(&text, prefix.chars().count()).map(f64::exp)
            }
            Attempt::Transient(e) => last = e,
            Attempt::Fatal(e) => {
                return Err(ScorerError::Failure(format!("{candidate}: {e}")));
            }
        }
    }
    Err(ScorerError::Failure(format!("{candidate}: gave up after {attempts} attempts ({last})")))
}

/// Scores each candidate as exp(Σ logprob of its continuation tokens).
///
/// Fails with [`ScorerError::ConfigMissing`] before touching the network when
/// the endpoint, key, or model is unset.
pub fn llm_score(request: &ScoreRequest, config: &LlmConfig) -> Result<ScoreResponse, ScorerError> {
    let (endpoint, key, model) = config.resolved()?;
    let url = LlmConfig::completions_url(endpoint);
    let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
    let prefix = build_prompt(&request.command, &request.history);

    let mut scores = Vec::with_capacity(request.candidates.len());
    for chunk in request.candidates.chunks(config.max_in_flight.max(1)) {
        let results: Vec<Result<f64, ScorerError>> = thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|c| {
                    let (agent, url, prefix) = (&agent, url.as_str(), prefix.as_str());
                    s.spawn(move || score_candidate(agent, config, (url, key, model), prefix, c))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(ScorerError::Failure("scoring thread panicked".into()))))
                .collect()
        });
        for (c, r) in chunk.iter().zip(results) {
            scores.push((c.clone(), r?));
        }
    }
    Ok(ScoreResponse { scores: scores.into_iter().collect() })
}

/// [`Scorer`] backed by a logprob-capable completions endpoint.
#[derive(Debug, Clone)]
pub struct LlmScorer {
    config: LlmConfig,
}

impl LlmScorer {
    /// Checks the configuration up front so misconfiguration surfaces before planning.
    pub fn new(config: LlmConfig) -> Result<Self, ScorerError> {
        config.resolved()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }
}

impl Scorer for LlmScorer {
    fn template_id(&self) -> &str {
        PROMPT_TEMPLATE_ID
    }

    fn score(&self, request: &ScoreRequest) -> Result<ScoreResponse, ScorerError> {
        llm_score(request, &self.config)
    }
}
