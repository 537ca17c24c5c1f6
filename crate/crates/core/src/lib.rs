//! Semantic-map navigation and likelihood-scored skill planning for
//! home-service robots.
//!
//! * [`geometry`]: points, polygons, and the outer-product containment test.
//! * [`map`]: rooms, furniture, and doors loaded from a JSON document.
//! * [`nav`]: shortest room-to-room paths over the door graph.
//! * [`planner`]: clarification, admissibility rules, and greedy skill selection.
//! * [`scorer`]: scripted and LLM-backed candidate likelihoods.
//! * [`sim`]: a discrete world that executes skill plans.
//! * [`cli`]: the `semplan` command-line front end.

pub mod cli;
pub mod geometry;
pub mod map;
pub mod nav;
pub mod planner;
pub mod scorer;
pub mod sim;

pub use geometry::{Containment, Point2, Polygon2};
pub use map::{SemanticLocation, SemanticMap};
pub use nav::{plan_path, replan, Goal, NavError, Path};
pub use planner::{plan_task, Command, PlanTrace, SkillInstance, SkillName, SkillSet};
pub use scorer::{Scorer, ScriptedScorer};
pub use sim::{run_plan, ExecTrace, WorldState};
