//! Clarification of vague object and location references in a command.
//!
//! A vocabulary word counts as ambiguous only in argument position: it is not
//! the first word, and it ends its noun phrase (end of command, trailing
//! punctuation, or followed by a preposition, conjunction, or particle).
//! "Put it on the thing" has two such slots; "Bring one apple" has none.

use std::collections::VecDeque;

use serde::Serialize;

/// Words that stand in for a proper noun the robot cannot ground.
pub const AMBIGUOUS_VOCABULARY: [&str; 6] = ["object", "it", "thing", "something", "one", "them"];

pub(crate) const DETERMINERS: [&str; 11] =
    ["the", "a", "an", "this", "that", "these", "those", "some", "any", "my", "your"];

/// Words that close a noun phrase.
pub(crate) const PHRASE_BREAKS: [&str; 34] = [
    "on", "in", "into", "onto", "to", "from", "at", "for", "with", "near", "under", "by", "of",
    "and", "then", "or", "next", "behind", "beside", "inside", "above", "below", "please",
    "here", "there", "up", "down", "back", "over", "away", "is", "are", "was", "were",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Clarification {
    pub question: String,
    /// The ambiguous word as written in the command.
    pub slot: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Substitution {
    pub token: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Command {
    pub raw: String,
    pub resolved: String,
    pub substitutions: Vec<Substitution>,
}

impl Command {
    /// A command that needed no clarification.
    pub fn plain(text: &str) -> Self {
        Self { raw: text.to_string(), resolved: text.to_string(), substitutions: Vec::new() }
    }
}

/// Source of answers to clarification questions (the user, or a script).
pub trait AnswerProvider {
    fn answer(&mut self, clarification: &Clarification) -> Option<String>;
}

/// Answers in a fixed order; runs dry after the last one.
#[derive(Debug, Clone, Default)]
pub struct ScriptedAnswers {
    answers: VecDeque<String>,
    pub asked: Vec<Clarification>,
}

impl ScriptedAnswers {
    pub fn new<I, S>(answers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { answers: answers.into_iter().map(Into::into).collect(), asked: Vec::new() }
    }
}

impl AnswerProvider for ScriptedAnswers {
    fn answer(&mut self, clarification: &Clarification) -> Option<String> {
        self.asked.push(clarification.clone());
        self.answers.pop_front()
    }
}

impl<F> AnswerProvider for F
where
    F: FnMut(&Clarification) -> Option<String>,
{
    fn answer(&mut self, clarification: &Clarification) -> Option<String> {
        self(clarification)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unresolved ambiguity: no usable answer for {slot:?}")]
pub struct UnresolvedAmbiguity {
    pub slot: String,
}

/// Splits a word into (leading punctuation, core, trailing punctuation).
pub(crate) fn split_word(word: &str) -> (&str, &str, &str) {
    let start = word.find(|c: char| c.is_alphanumeric()).unwrap_or(word.len());
    let end = word
        .rfind(|c: char| c.is_alphanumeric())
        .map_or(start, |i| i + word[i..].chars().next().map_or(1, char::len_utf8));
    (&word[..start], &word[start..end], &word[end..])
}

fn is_vocabulary(core: &str) -> bool {
    AMBIGUOUS_VOCABULARY.iter().any(|v| v.eq_ignore_ascii_case(core))
}

fn in_list(list: &[&str], core: &str) -> bool {
    list.iter().any(|w| w.eq_ignore_ascii_case(core))
}

/// Indices of words that are ambiguous in argument position.
pub fn ambiguous_slots(text: &str) -> Vec<usize> {
    let words: Vec<&str> = text.split_whitespace().collect();
    (1..words.len())
        .filter(|&i| {
            let (_, core, trail) = split_word(words[i]);
            if !is_vocabulary(core) {
                return false;
            }
            if !trail.is_empty() {
                return true;
            }
            match words.get(i + 1) {
                None => true,
                Some(next) => in_list(&PHRASE_BREAKS, split_word(next).1),
            }
        })
        .collect()
}

/// Any vocabulary word anywhere in `text`, regardless of position.
pub fn contains_vocabulary(text: &str) -> bool {
    text.split_whitespace().any(|w| is_vocabulary(split_word(w).1))
}

/// Asks one question per ambiguous slot and splices the answers in.
///
/// Pronouns without a determiner become "the <answer>"; a vocabulary noun
/// after a determiner is replaced by the answer alone. Whitespace in the
/// resolved text is normalized to single spaces.
pub fn resolve_ambiguity(
    raw: &str,
    oracle: &mut dyn AnswerProvider,
) -> Result<Command, UnresolvedAmbiguity> {
    let slots = ambiguous_slots(raw);
    if slots.is_empty() {
        return Ok(Command::plain(raw));
    }

    let mut words: Vec<String> = raw.split_whitespace().map(str::to_string).collect();
    let mut substitutions = Vec::with_capacity(slots.len());
    for i in slots {
        let (lead, core, trail) = split_word(&words[i]);
        let (lead, core, trail) = (lead.to_string(), core.to_string(), trail.to_string());
        let prev = split_word(&words[i - 1]).1;
        let has_det = in_list(&DETERMINERS, prev);
        let phrase = if has_det { format!("{prev} {core}") } else { core.clone() };
        let clarification = Clarification {
            question: format!("What do you mean by \"{phrase}\"? Please name it."),
            slot: core.clone(),
        };
        let answer = oracle
            .answer(&clarification)
            .map(|a| a.trim().to_string())
            .filter(|a| !a.is_empty() && !contains_vocabulary(a))
            .ok_or_else(|| UnresolvedAmbiguity { slot: core.clone() })?;
        let replacement = if has_det { answer.clone() } else { format!("the {answer}") };
        words[i] = format!("{lead}{replacement}{trail}");
        substitutions.push(Substitution { token: core, answer });
    }

    Ok(Command { raw: raw.to_string(), resolved: words.join(" "), substitutions })
}
