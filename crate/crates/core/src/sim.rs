//! Discrete world simulator for replaying skill plans against a map.
//!
//! Perception is topological: `find_obj` sees every object placed on furniture
//! in the robot's current room and nothing else.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{euclidean, Point2};
use crate::map::SemanticMap;
use crate::nav::{plan_path, Goal, NavError};
use crate::planner::{SkillInstance, SkillName, OPERATOR};

/// Maximum robot–operator distance (m) for a handover.
pub const HANDOVER_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorldState {
    /// object -> furniture it rests on
    pub placements: BTreeMap<String, String>,
    pub robot: Point2,
    pub held: Option<String>,
    pub operator: Point2,
    pub found: BTreeSet<String>,
    /// Objects handed to the operator.
    pub delivered: BTreeSet<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldDoc {
    objects: BTreeMap<String, String>,
    robot: [f64; 2],
    operator: [f64; 2],
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("world parse error: {0}")]
    Parse(String),
    #[error("object {object} rests on unknown furniture {furniture}")]
    UnknownFurniture { object: String, furniture: String },
    #[error("{0} position is not finite")]
    NonFinite(&'static str),
}

impl WorldState {
    pub fn new(robot: Point2, operator: Point2) -> Self {
        Self {
            placements: BTreeMap::new(),
            robot,
            held: None,
            operator,
            found: BTreeSet::new(),
            delivered: BTreeSet::new(),
        }
    }

    /// Loads a world fixture and checks every placement against `map`.
    pub fn from_json(doc: &str, map: &SemanticMap) -> Result<Self, WorldError> {
        let raw: WorldDoc = serde_json::from_str(doc).map_err(|e| WorldError::Parse(e.to_string()))?;
        let robot = Point2::from(raw.robot);
        let operator = Point2::from(raw.operator);
        if !robot.is_finite() {
            return Err(WorldError::NonFinite("robot"));
        }
        if !operator.is_finite() {
            return Err(WorldError::NonFinite("operator"));
        }
        if let Some((object, furniture)) =
            raw.objects.iter().find(|(_, f)| map.furniture_named(f).is_none())
        {
            return Err(WorldError::UnknownFurniture {
                object: object.clone(),
                furniture: furniture.clone(),
            });
        }
        Ok(Self { placements: raw.objects, ..Self::new(robot, operator) })
    }

    /// Every object the world knows about, wherever it is.
    pub fn inventory(&self) -> BTreeSet<&str> {
        self.placements
            .keys()
            .chain(self.held.iter())
            .chain(self.delivered.iter())
            .map(String::as_str)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Failure {
    NoPath,
    OutsideArena,
    UnknownLocation(String),
    ObjectNotVisible(String),
    NotFoundYet(String),
    GripperOccupied,
    NothingHeld,
    WrongRoom(String),
    OperatorTooFar,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::NoPath => f.write_str("NoPath"),
            Failure::OutsideArena => f.write_str("OutsideArena"),
            Failure::UnknownLocation(l) => write!(f, "UnknownLocation({l})"),
            Failure::ObjectNotVisible(o) => write!(f, "ObjectNotVisible({o})"),
            Failure::NotFoundYet(o) => write!(f, "NotFoundYet({o})"),
            Failure::GripperOccupied => f.write_str("GripperOccupied"),
            Failure::NothingHeld => f.write_str("NothingHeld"),
            Failure::WrongRoom(l) => write!(f, "WrongRoom({l})"),
            Failure::OperatorTooFar => f.write_str("OperatorTooFar"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Failed(Failure),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecStep {
    pub skill: SkillInstance,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecTrace {
    pub steps: Vec<ExecStep>,
    pub final_world: WorldState,
}

impl ExecTrace {
    pub fn all_ok(&self) -> bool {
        self.steps.iter().all(|s| s.outcome == Outcome::Ok)
    }
}

fn location_anchor(map: &SemanticMap, world: &WorldState, loc: &str) -> Result<Point2, Failure> {
    if loc == OPERATOR {
        return Ok(world.operator);
    }
    map.furniture_anchor(loc)
        .or_else(|_| map.room_anchor(loc))
        .map_err(|_| Failure::UnknownLocation(loc.to_string()))
}

fn drive(map: &SemanticMap, world: &WorldState, target: Point2) -> Result<WorldState, Failure> {
    match plan_path(map, world.robot, &Goal::Point(target)) {
        Ok(_) => Ok(WorldState { robot: target, ..world.clone() }),
        Err(NavError::OutsideArena(_)) => Err(Failure::OutsideArena),
        Err(_) => Err(Failure::NoPath),
    }
}

/// Room holding the furniture `object` rests on, if it is placed at all.
fn object_room<'m>(map: &'m SemanticMap, world: &WorldState, object: &str) -> Option<&'m str> {
    let furniture = world.placements.get(object)?;
    map.furniture_named(furniture).map(|f| f.room.as_str())
}

pub fn apply_skill(
    map: &SemanticMap,
    world: &WorldState,
    skill: &SkillInstance,
) -> Result<WorldState, Failure> {
    let robot_room = map.room_of(world.robot);
    let arg = skill.arg().unwrap_or_default();
    match skill.name {
        SkillName::MoveTo => {
            let target = location_anchor(map, world, arg)?;
            drive(map, world, target)
        }
        SkillName::FollowPerson => drive(map, world, world.operator),
        SkillName::FindObj => {
            if robot_room.is_some() && object_room(map, world, arg) == robot_room {
                let mut next = world.clone();
                next.found.insert(arg.to_string());
                Ok(next)
            } else {
                Err(Failure::ObjectNotVisible(arg.to_string()))
            }
        }
        SkillName::Grasp => {
            if world.held.is_some() {
                return Err(Failure::GripperOccupied);
            }
            if !world.found.contains(arg) {
                return Err(Failure::NotFoundYet(arg.to_string()));
            }
            if robot_room.is_none() || object_room(map, world, arg) != robot_room {
                return Err(Failure::ObjectNotVisible(arg.to_string()));
            }
            let mut next = world.clone();
            next.placements.remove(arg);
            next.held = Some(arg.to_string());
            Ok(next)
        }
        SkillName::Place => {
            let held = world.held.clone().ok_or(Failure::NothingHeld)?;
            let furniture = map
                .furniture_named(arg)
                .ok_or_else(|| Failure::UnknownLocation(arg.to_string()))?;
            if robot_room != Some(furniture.room.as_str()) {
                return Err(Failure::WrongRoom(arg.to_string()));
            }
            let mut next = world.clone();
            next.placements.insert(held, arg.to_string());
            next.held = None;
            Ok(next)
        }
        SkillName::Handover => {
            let held = world.held.clone().ok_or(Failure::NothingHeld)?;
            if euclidean(world.robot, world.operator) > HANDOVER_RADIUS {
                return Err(Failure::OperatorTooFar);
            }
            let mut next = world.clone();
            next.held = None;
            next.delivered.insert(held);
            Ok(next)
        }
        SkillName::Answer | SkillName::Done => Ok(world.clone()),
    }
}

/// Executes `plan` step by step, stopping after the first failure or `done`.
pub fn run_plan(map: &SemanticMap, world: &WorldState, plan: &[SkillInstance]) -> ExecTrace {
    let mut state = world.clone();
    let mut steps = Vec::with_capacity(plan.len());
    for skill in plan {
        match apply_skill(map, &state, skill) {
            Ok(next) => {
                state = next;
                steps.push(ExecStep { skill: skill.clone(), outcome: Outcome::Ok });
                if skill.is_done() {
                    break;
                }
            }
            Err(reason) => {
                steps.push(ExecStep { skill: skill.clone(), outcome: Outcome::Failed(reason) });
                break;
            }
        }
    }
    ExecTrace { steps, final_world: state }
}

/// Task success conditions checked after execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoalSpec {
    Delivered { object: String },
    OnFurniture { object: String, furniture: String },
}

impl FromStr for GoalSpec {
    type Err = String;

    /// `deliver:<object>` or `on:<object>:<furniture>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        match parts.as_slice() {
            ["deliver", object] if !object.is_empty() => {
                Ok(GoalSpec::Delivered { object: object.to_string() })
            }
            ["on", object, furniture] if !object.is_empty() && !furniture.is_empty() => {
                Ok(GoalSpec::OnFurniture { object: object.to_string(), furniture: furniture.to_string() })
            }
            _ => Err(format!("bad goal {s:?}; expected deliver:<object> or on:<object>:<furniture>")),
        }
    }
}

impl fmt::Display for GoalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoalSpec::Delivered { object } => write!(f, "deliver:{object}"),
            GoalSpec::OnFurniture { object, furniture } => write!(f, "on:{object}:{furniture}"),
        }
    }
}

pub fn check_goal(world: &WorldState, goal: &GoalSpec) -> bool {
    match goal {
        GoalSpec::Delivered { object } => world.delivered.contains(object),
        GoalSpec::OnFurniture { object, furniture } => {
            world.placements.get(object) == Some(furniture)
        }
    }
}
