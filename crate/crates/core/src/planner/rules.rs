//! Candidate grounding and the admissibility rules that filter it.
//!
//! * no repeat: a skill may not follow a step with the same skill name.
//! * find before grasp: `grasp(x)` needs an earlier `find_obj(x)` and an empty gripper.
//! * gripper: `place`/`handover` need a held object; `find_obj`/`grasp` need none.
//! * `done` is always admissible.

use std::collections::BTreeSet;

use super::ambiguity::{split_word, AMBIGUOUS_VOCABULARY, DETERMINERS, PHRASE_BREAKS};
use super::skill::{SkillInstance, SkillName};
use crate::map::SemanticMap;

/// Reserved location naming the person who gave the command.
pub const OPERATOR: &str = "operator";

/// The grounded skill universe for one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkillSet {
    pub locations: BTreeSet<String>,
    pub furniture: BTreeSet<String>,
    pub objects: BTreeSet<String>,
}

impl SkillSet {
    pub fn new<L, F, O>(locations: L, furniture: F, objects: O) -> Self
    where
        L: IntoIterator<Item = String>,
        F: IntoIterator<Item = String>,
        O: IntoIterator<Item = String>,
    {
        let furniture: BTreeSet<String> = furniture.into_iter().collect();
        let mut locations: BTreeSet<String> = locations.into_iter().collect();
        locations.extend(furniture.iter().cloned());
        locations.insert(OPERATOR.to_string());
        Self { locations, furniture, objects: objects.into_iter().collect() }
    }

    /// Locations come from the map (rooms, furniture, the operator); objects
    /// are the head nouns of determiner phrases in the resolved command.
    pub fn ground(map: &SemanticMap, resolved_command: &str) -> Self {
        let rooms = map.rooms().iter().map(|r| r.name.clone());
        let furniture = map.furniture().iter().map(|f| f.name.clone());
        let objects = extract_objects(map, resolved_command);
        Self::new(rooms, furniture, objects)
    }

    /// Every grounded candidate, sorted.
    pub fn candidates(&self) -> Vec<SkillInstance> {
        let mut out = Vec::new();
        for name in SkillName::ALL {
            let args: Vec<&String> = match name {
                SkillName::MoveTo => self.locations.iter().collect(),
                SkillName::Place => self.furniture.iter().collect(),
                SkillName::FindObj | SkillName::Grasp | SkillName::Answer => {
                    self.objects.iter().collect()
                }
                SkillName::Handover | SkillName::FollowPerson | SkillName::Done => {
                    out.push(SkillInstance::nullary(name));
                    continue;
                }
            };
            out.extend(args.into_iter().map(|a| SkillInstance::unary(name, a)));
        }
        out.sort();
        out
    }
}

fn map_names(map: &SemanticMap) -> BTreeSet<String> {
    map.rooms()
        .iter()
        .map(|r| r.name.to_lowercase())
        .chain(map.furniture().iter().map(|f| f.name.to_lowercase()))
        .collect()
}

/// Object nouns mentioned in `command`, excluding anything that names a
/// room, a piece of furniture, or the operator.
pub fn extract_objects(map: &SemanticMap, command: &str) -> BTreeSet<String> {
    let names = map_names(map);
    let mut words: Vec<String> = command
        .split_whitespace()
        .map(|w| split_word(w).1.to_lowercase())
        .filter(|w| !w.is_empty())
        .collect();

    // "kitchen table" -> "kitchen_table", longest names first
    let mut multi: Vec<Vec<&str>> = names
        .iter()
        .map(|n| n.split('_').collect::<Vec<_>>())
        .filter(|parts| parts.len() > 1)
        .collect();
    multi.sort_by_key(|parts| std::cmp::Reverse(parts.len()));
    for parts in multi {
        let mut i = 0;
        while i + parts.len() <= words.len() {
            if words[i..i + parts.len()].iter().zip(&parts).all(|(w, p)| w == p) {
                words.splice(i..i + parts.len(), [parts.join("_")]);
            }
            i += 1;
        }
    }

    let is_break = |w: &str| {
        DETERMINERS.contains(&w) || PHRASE_BREAKS.contains(&w) || matches!(w, "me" | "you" | "us")
    };
    let mut objects = BTreeSet::new();
    for (i, w) in words.iter().enumerate() {
        if !DETERMINERS.contains(&w.as_str()) {
            continue;
        }
        let head = words[i + 1..].iter().take_while(|w| !is_break(w)).last();
        if let Some(head) = head {
            let reserved = names.contains(head)
                || head == OPERATOR
                || AMBIGUOUS_VOCABULARY.contains(&head.as_str());
            if !reserved {
                objects.insert(head.clone());
            }
        }
    }
    objects
}

/// What the planner believes about the gripper, replayed from the history.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PlannerState {
    pub held: Option<String>,
    /// Objects located by `find_obj` since the last grasp.
    pub found: BTreeSet<String>,
}

impl PlannerState {
    pub fn from_history(history: &[SkillInstance]) -> Self {
        let mut state = Self::default();
        for step in history {
            state.apply(step);
        }
        state
    }

    pub fn apply(&mut self, step: &SkillInstance) {
        match step.name {
            SkillName::FindObj => {
                if let Some(x) = step.arg() {
                    self.found.insert(x.to_string());
                }
            }
            SkillName::Grasp => {
                self.held = step.arg().map(str::to_string);
                // a grasp consumes every earlier sighting
                self.found.clear();
            }
            SkillName::Place | SkillName::Handover => self.held = None,
            _ => {}
        }
    }
}

/// Whether `candidate` may follow `history` given `state`.
pub fn is_admissible(candidate: &SkillInstance, history: &[SkillInstance], state: &PlannerState) -> bool {
    if candidate.is_done() {
        return true;
    }
    if history.last().is_some_and(|prev| prev.name == candidate.name) {
        return false;
    }
    let holding = state.held.is_some();
    match candidate.name {
        SkillName::Grasp => !holding && candidate.arg().is_some_and(|x| state.found.contains(x)),
        SkillName::FindObj => !holding,
        SkillName::Place | SkillName::Handover => holding,
        _ => true,
    }
}

pub fn admissible_skills(
    skill_set: &SkillSet,
    history: &[SkillInstance],
    state: &PlannerState,
) -> Vec<SkillInstance> {
    skill_set
        .candidates()
        .into_iter()
        .filter(|c| is_admissible(c, history, state))
        .collect()
}

/// Checks the admissibility rules on every prefix of `steps`; returns the first offending index.
pub fn check_trace(steps: &[SkillInstance]) -> Result<(), usize> {
    let mut state = PlannerState::default();
    for (i, step) in steps.iter().enumerate() {
        if !is_admissible(step, &steps[..i], &state) {
            return Err(i);
        }
        state.apply(step);
    }
    Ok(())
}
