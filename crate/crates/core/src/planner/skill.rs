use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Primitive robot skills the task planner sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkillName {
    MoveTo,
    FindObj,
    Grasp,
    Place,
    Handover,
    Answer,
    FollowPerson,
    Done,
}

impl SkillName {
    pub const ALL: [SkillName; 8] = [
        SkillName::MoveTo,
        SkillName::FindObj,
        SkillName::Grasp,
        SkillName::Place,
        SkillName::Handover,
        SkillName::Answer,
        SkillName::FollowPerson,
        SkillName::Done,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SkillName::MoveTo => "move_to",
            SkillName::FindObj => "find_obj",
            SkillName::Grasp => "grasp",
            SkillName::Place => "place",
            SkillName::Handover => "handover",
            SkillName::Answer => "answer",
            SkillName::FollowPerson => "follow_person",
            SkillName::Done => "done",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            SkillName::Handover | SkillName::FollowPerson | SkillName::Done => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for SkillName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SkillName {
    type Err = SkillParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SkillName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| SkillParseError::UnknownSkill(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkillParseError {
    #[error("unknown skill: {0}")]
    UnknownSkill(String),
    #[error("{skill} takes {expected} argument(s), got {got}")]
    Arity { skill: SkillName, expected: usize, got: usize },
    #[error("malformed skill: {0}")]
    Malformed(String),
}

/// A skill with grounded arguments, written `name(arg, ...)` or bare `name`
/// for nullary skills.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SkillInstance {
    pub name: SkillName,
    pub args: Vec<String>,
}

impl SkillInstance {
    pub fn new(name: SkillName, args: Vec<String>) -> Result<Self, SkillParseError> {
        if args.len() != name.arity() {
            return Err(SkillParseError::Arity { skill: name, expected: name.arity(), got: args.len() });
        }
        Ok(Self { name, args })
    }

    pub fn unary(name: SkillName, arg: &str) -> Self {
        Self::new(name, vec![arg.to_string()]).expect("unary skill")
    }

    pub fn nullary(name: SkillName) -> Self {
        Self::new(name, Vec::new()).expect("nullary skill")
    }

    pub fn done() -> Self {
        Self::nullary(SkillName::Done)
    }

    pub fn is_done(&self) -> bool {
        self.name == SkillName::Done
    }

    pub fn arg(&self) -> Option<&str> {
        self.args.first().map(String::as_str)
    }
}

impl Ord for SkillInstance {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name
            .as_str()
            .cmp(other.name.as_str())
            .then_with(|| self.args.cmp(&other.args))
    }
}

impl PartialOrd for SkillInstance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SkillInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            f.write_str(self.name.as_str())
        } else {
            write!(f, "{}({})", self.name, self.args.join(", "))
        }
    }
}

impl FromStr for SkillInstance {
    type Err = SkillParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            None => (s, Vec::new()),
            Some(open) => {
                let inner = s[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| SkillParseError::Malformed(s.to_string()))?;
                let args = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner.split(',').map(|a| a.trim().to_string()).collect::<Vec<_>>()
                };
                if args.iter().any(String::is_empty) {
                    return Err(SkillParseError::Malformed(s.to_string()));
                }
                (s[..open].trim(), args)
            }
        };
        SkillInstance::new(name.parse()?, args)
    }
}

impl Serialize for SkillInstance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SkillInstance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
