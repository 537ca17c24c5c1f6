//! C ABI over the semplan planner.
//!
//! Maps and paths cross the boundary as opaque handles that the caller frees
//! with the matching `*_free` function. Every fallible call returns a
//! [`SemplanStatus`]; the message for the most recent failure on the calling
//! thread is available from [`semplan_last_error`]. Strings returned through
//! out-parameters are owned by the caller and released with
//! [`semplan_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use semplan::map::MapError;
use semplan::nav::{self, Goal, NavError};
use semplan::planner::{
    plan_task, resolve_ambiguity, Command, PlanError, PlanTrace, ScriptedAnswers, SkillSet,
};
use semplan::scorer::ScriptedScorer;
use semplan::sim::{run_plan, ExecTrace, WorldState};
use semplan::{Point2, SemanticMap};
use serde::Serialize;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemplanStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ValidationError = 4,
    UnknownDoor = 5,
    UnknownFurniture = 6,
    OutsideArena = 7,
    NoPath = 8,
    IndexOutOfRange = 9,
    UnresolvedAmbiguity = 10,
    PlanningFailed = 11,
    Panic = 99,
}

/// Opaque map handle.
pub struct SemplanMap {
    inner: SemanticMap,
}

/// Opaque path handle.
pub struct SemplanPath {
    inner: nav::Path,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(SemplanStatus, String);

type FfiResult = Result<(), Failure>;

fn guard(body: impl FnOnce() -> FfiResult) -> SemplanStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SemplanStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SemplanStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SemplanStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SemplanStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(SemplanStatus::NullArgument, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(SemplanStatus::NullArgument, format!("{what} is null")))
}

fn to_cstring(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

fn point(x: f64, y: f64) -> Result<Point2, Failure> {
    Point2::try_new(x, y).map_err(|e| Failure(SemplanStatus::ParseError, e.to_string()))
}

fn map_failure(e: MapError) -> Failure {
    let status = match &e {
        MapError::Parse(_) => SemplanStatus::ParseError,
        MapError::Validation(_) => SemplanStatus::ValidationError,
        MapError::UnknownDoor(_) => SemplanStatus::UnknownDoor,
        MapError::UnknownFurniture(_) => SemplanStatus::UnknownFurniture,
        MapError::UnknownRoom(_) => SemplanStatus::ValidationError,
    };
    Failure(status, e.to_string())
}

fn nav_failure(e: NavError) -> Failure {
    let status = match &e {
        NavError::OutsideArena(_) => SemplanStatus::OutsideArena,
        NavError::NoPath => SemplanStatus::NoPath,
        NavError::UnknownFurniture(_) => SemplanStatus::UnknownFurniture,
        NavError::UnknownDoor(_) => SemplanStatus::UnknownDoor,
    };
    Failure(status, e.to_string())
}

/// Message describing the last failed call on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn semplan_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn semplan_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a map document.
#[no_mangle]
pub unsafe extern "C" fn semplan_map_from_json(
    json: *const c_char,
    out: *mut *mut SemplanMap,
) -> SemplanStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let doc = str_arg(json, "json")?;
        let inner = SemanticMap::from_json(doc).map_err(map_failure)?;
        *out = Box::into_raw(Box::new(SemplanMap { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn semplan_map_free(map: *mut SemplanMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Canonical JSON form of the map.
#[no_mangle]
pub unsafe extern "C" fn semplan_map_to_json(
    map: *const SemplanMap,
    out: *mut *mut c_char,
) -> SemplanStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let map = handle(map, "map")?;
        *out = to_cstring(map.inner.to_canonical_json());
        Ok(())
    })
}

/// Writes `room` or `room/furniture` for the point. Returns
/// `SEMPLAN_STATUS_OUTSIDE_ARENA` when no room contains it.
#[no_mangle]
pub unsafe extern "C" fn semplan_map_locate(
    map: *const SemplanMap,
    x: f64,
    y: f64,
    out: *mut *mut c_char,
) -> SemplanStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let map = handle(map, "map")?;
        let loc = map.inner.semantic_location(point(x, y)?);
        if loc.room.is_none() {
            return Err(Failure(SemplanStatus::OutsideArena, "point lies outside every room".into()));
        }
        *out = to_cstring(loc.to_string());
        Ok(())
    })
}

/// Opens or closes a door on the handle in place.
#[no_mangle]
pub unsafe extern "C" fn semplan_map_set_door_passable(
    map: *mut SemplanMap,
    door: *const c_char,
    passable: bool,
) -> SemplanStatus {
    guard(|| {
        let map = map
            .as_mut()
            .ok_or_else(|| Failure(SemplanStatus::NullArgument, "map is null".into()))?;
        let door = str_arg(door, "door")?;
        map.inner = map.inner.set_door_passable(door, passable).map_err(map_failure)?;
        Ok(())
    })
}

unsafe fn plan_into(
    map: *const SemplanMap,
    start: (f64, f64),
    goal: impl FnOnce() -> Result<Goal, Failure>,
    out: *mut *mut SemplanPath,
) -> FfiResult {
    let out = out_ptr(out, "out")?;
    *out = ptr::null_mut();
    let map = handle(map, "map")?;
    let start = point(start.0, start.1)?;
    let path = nav::plan_path(&map.inner, start, &goal()?).map_err(nav_failure)?;
    *out = Box::into_raw(Box::new(SemplanPath { inner: path }));
    Ok(())
}

/// Shortest path from a start point to a goal point.
#[no_mangle]
pub unsafe extern "C" fn semplan_plan_path(
    map: *const SemplanMap,
    start_x: f64,
    start_y: f64,
    goal_x: f64,
    goal_y: f64,
    out: *mut *mut SemplanPath,
) -> SemplanStatus {
    guard(|| plan_into(map, (start_x, start_y), || Ok(Goal::Point(point(goal_x, goal_y)?)), out))
}

/// Shortest path from a start point to the anchor of a piece of furniture.
#[no_mangle]
pub unsafe extern "C" fn semplan_plan_path_to_furniture(
    map: *const SemplanMap,
    start_x: f64,
    start_y: f64,
    furniture: *const c_char,
    out: *mut *mut SemplanPath,
) -> SemplanStatus {
    guard(|| {
        let name = str_arg(furniture, "furniture")?;
        plan_into(map, (start_x, start_y), || Ok(Goal::Furniture(name.to_string())), out)
    })
}

/// Total length in meters, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn semplan_path_length(path: *const SemplanPath) -> f64 {
    path.as_ref().map_or(f64::NAN, |p| p.inner.length)
}

#[no_mangle]
pub unsafe extern "C" fn semplan_path_waypoint_count(path: *const SemplanPath) -> usize {
    path.as_ref().map_or(0, |p| p.inner.waypoints.len())
}

#[no_mangle]
pub unsafe extern "C" fn semplan_path_waypoint(
    path: *const SemplanPath,
    index: usize,
    x: *mut f64,
    y: *mut f64,
) -> SemplanStatus {
    guard(|| {
        let path = handle(path, "path")?;
        let (x, y) = (out_ptr(x, "x")?, out_ptr(y, "y")?);
        let node = path.inner.waypoints.get(index).ok_or_else(|| {
            Failure(SemplanStatus::IndexOutOfRange, format!("waypoint {index} out of range"))
        })?;
        *x = node.anchor.x;
        *y = node.anchor.y;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn semplan_path_to_json(
    path: *const SemplanPath,
    out: *mut *mut c_char,
) -> SemplanStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let path = handle(path, "path")?;
        let text = serde_json::to_string_pretty(&path.inner)
            .map_err(|e| Failure(SemplanStatus::Panic, e.to_string()))?;
        *out = to_cstring(text);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn semplan_path_free(path: *mut SemplanPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

#[derive(Serialize)]
struct TaskReport<'a> {
    command: &'a Command,
    plan: &'a PlanTrace,
    execution: &'a ExecTrace,
}

/// Plans a task with a scripted scenario and replays it in the simulator.
///
/// `command` may be null to use the scenario's command. `answers` may be null
/// or hold newline-separated clarification answers. On success `out` receives
/// the JSON report `{command, plan, execution}`.
#[no_mangle]
pub unsafe extern "C" fn semplan_plan_task_scripted(
    map: *const SemplanMap,
    world_json: *const c_char,
    scenario_json: *const c_char,
    command: *const c_char,
    answers: *const c_char,
    max_steps: usize,
    out: *mut *mut c_char,
) -> SemplanStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let map = &handle(map, "map")?.inner;
        let world = WorldState::from_json(str_arg(world_json, "world_json")?, map)
            .map_err(|e| Failure(SemplanStatus::ParseError, e.to_string()))?;
        let scorer = ScriptedScorer::from_json(str_arg(scenario_json, "scenario_json")?)
            .map_err(|e| Failure(SemplanStatus::ParseError, e.to_string()))?;
        let raw = opt_str_arg(command, "command")?
            .map(str::to_string)
            .unwrap_or_else(|| scorer.scenario().command.clone());
        let answers = opt_str_arg(answers, "answers")?.unwrap_or_default();
        let mut oracle = ScriptedAnswers::new(answers.lines().filter(|l| !l.trim().is_empty()));
        let command = resolve_ambiguity(&raw, &mut oracle)
            .map_err(|e| Failure(SemplanStatus::UnresolvedAmbiguity, e.to_string()))?;

        let skills = SkillSet::ground(map, &command.resolved);
        let trace = plan_task(&skills, &command, &scorer, max_steps).map_err(|e| {
            let status = match e {
                PlanError::UnresolvedAmbiguity(_) => SemplanStatus::UnresolvedAmbiguity,
                _ => SemplanStatus::PlanningFailed,
            };
            Failure(status, e.to_string())
        })?;
        let execution = run_plan(map, &world, &trace.skills());
        let report = TaskReport { command: &command, plan: &trace, execution: &execution };
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| Failure(SemplanStatus::Panic, e.to_string()))?;
        *out = to_cstring(text);
        Ok(())
    })
}
