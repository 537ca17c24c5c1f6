//! The `semplan` command line.
//!
//! Exit codes: 0 success, 1 planning or execution failure, 2 input or
//! configuration error.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::geometry::Point2;
use crate::map::{check_document, MapError, SemanticMap};
use crate::nav::{plan_path, Goal, NavError};
use crate::planner::{
    plan_task, resolve_ambiguity, AnswerProvider, Clarification, Command, PlanError, PlanTrace,
    SkillInstance, SkillSet, DEFAULT_MAX_STEPS,
};
use crate::scorer::{LlmConfig, LlmScorer, Scorer, ScorerError, ScriptedScorer};
use crate::sim::{check_goal, run_plan, ExecTrace, GoalSpec, Outcome, WorldState};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "semplan", version, about = "Semantic-map navigation and skill planning")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Map file utilities.
    Map {
        #[command(subcommand)]
        action: MapCmd,
    },
    /// Print the room (and furniture) containing a point.
    Locate {
        map: PathBuf,
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Shortest path through passable doors.
    PlanPath {
        map: PathBuf,
        /// Start point as `x,y`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        start: Point2,
        /// Furniture name or `x,y`.
        #[arg(long, allow_hyphen_values = true)]
        goal: String,
        /// Treat this door as closed (repeatable).
        #[arg(long = "close-door")]
        close_door: Vec<String>,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Plan a task for a command and replay it in the simulator.
    PlanTask(PlanTaskArgs),
    /// World simulator utilities.
    Sim {
        #[command(subcommand)]
        action: SimCmd,
    },
}

#[derive(Debug, Subcommand)]
enum MapCmd {
    /// Check a map file and list every violation.
    Validate { map: PathBuf },
}

#[derive(Debug, Subcommand)]
enum SimCmd {
    /// Execute a plan file (JSON array of skills) against a world.
    Run {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        world: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// `deliver:<object>` or `on:<object>:<furniture>`.
        #[arg(long)]
        goal: Option<GoalSpec>,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
}

#[derive(Debug, Args)]
struct PlanTaskArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    world: PathBuf,
    /// Command text; defaults to the scripted scenario's command.
    #[arg(long)]
    command: Option<String>,
    /// Scripted scorer scenario file.
    #[arg(long, conflicts_with = "llm", required_unless_present = "llm")]
    scripted: Option<PathBuf>,
    /// Score with the LLM endpoint from SEMPLAN_LLM_* variables.
    #[arg(long)]
    llm: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    /// Answer to the next clarification question (repeatable, used in order).
    #[arg(long = "answer")]
    answers: Vec<String>,
    /// Never prompt on the console.
    #[arg(long)]
    non_interactive: bool,
    #[arg(long)]
    goal: Option<GoalSpec>,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
}

fn parse_point(s: &str) -> Result<Point2, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x in {s:?}: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y in {s:?}: {e}"))?;
    Point2::try_new(x, y).map_err(|e| e.to_string())
}

struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    fn failure(message: impl Into<String>) -> Self {
        Self { code: EXIT_FAILURE, message: message.into() }
    }
}

struct Io<'a> {
    stdin: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    interactive: bool,
}

type CmdResult = Result<u8, Fail>;

/// Runs the CLI with explicit streams and returns the process exit code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    interactive: bool,
) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let to_stdout = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let rendered = e.render().to_string();
            if to_stdout {
                let _ = write!(stdout, "{rendered}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "{rendered}");
            return EXIT_INPUT;
        }
    };
    let mut io = Io { stdin, out: stdout, err: stderr, interactive };
    let result = match cli.command {
        Cmd::Map { action: MapCmd::Validate { map } } => map_validate(&mut io, &map),
        Cmd::Locate { map, x, y, format } => locate(&mut io, &map, x, y, format),
        Cmd::PlanPath { map, start, goal, close_door, format } => {
            plan_path_cmd(&mut io, &map, start, &goal, &close_door, format)
        }
        Cmd::PlanTask(args) => plan_task_cmd(&mut io, args),
        Cmd::Sim { action: SimCmd::Run { map, world, plan, goal, format } } => {
            sim_run(&mut io, &map, &world, &plan, goal.as_ref(), format)
        }
    };
    match result {
        Ok(code) => code,
        Err(Fail { code, message }) => {
            let _ = writeln!(io.err, "error: {message}");
            code
        }
    }
}

fn read(path: &FsPath) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::input(format!("{}: {e}", path.display())))
}

fn load_map(path: &FsPath) -> Result<SemanticMap, Fail> {
    SemanticMap::from_json(&read(path)?).map_err(|e| Fail::input(format!("{}: {e}", path.display())))
}

fn load_world(path: &FsPath, map: &SemanticMap) -> Result<WorldState, Fail> {
    WorldState::from_json(&read(path)?, map).map_err(|e| Fail::input(format!("{}: {e}", path.display())))
}

fn emit_json<T: Serialize>(io: &mut Io, value: &T) -> Result<(), Fail> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Fail::failure(e.to_string()))?;
    writeln!(io.out, "{text}").map_err(|e| Fail::failure(e.to_string()))
}

fn say(io: &mut Io, text: impl std::fmt::Display) -> Result<(), Fail> {
    writeln!(io.out, "{text}").map_err(|e| Fail::failure(e.to_string()))
}

fn map_validate(io: &mut Io, path: &FsPath) -> CmdResult {
    let doc = read(path)?;
    let report = check_document(&doc).map_err(|e| Fail::input(format!("{}: {e}", path.display())))?;
    for e in &report.errors {
        say(io, format!("error: {e}"))?;
    }
    for w in &report.warnings {
        say(io, format!("warning: {w}"))?;
    }
    if !report.errors.is_empty() {
        return Ok(EXIT_INPUT);
    }
    let map = SemanticMap::from_json(&doc).map_err(|e| Fail::input(e.to_string()))?;
    say(
        io,
        format!(
            "ok: {} rooms, {} furniture, {} doors",
            map.rooms().len(),
            map.furniture().len(),
            map.doors().len()
        ),
    )?;
    Ok(EXIT_OK)
}

fn locate(io: &mut Io, path: &FsPath, x: f64, y: f64, format: Format) -> CmdResult {
    let map = load_map(path)?;
    let p = Point2::try_new(x, y).map_err(|e| Fail::input(e.to_string()))?;
    let loc = map.semantic_location(p);
    match format {
        Format::Human => say(io, &loc)?,
        Format::Json => emit_json(io, &loc)?,
    }
    Ok(if loc.room.is_some() { EXIT_OK } else { EXIT_FAILURE })
}

fn parse_goal(text: &str) -> Goal {
    match parse_point(text) {
        Ok(p) => Goal::Point(p),
        Err(_) => Goal::Furniture(text.to_string()),
    }
}

fn plan_path_cmd(
    io: &mut Io,
    path: &FsPath,
    start: Point2,
    goal: &str,
    closed: &[String],
    format: Format,
) -> CmdResult {
    let mut map = load_map(path)?;
    for door in closed {
        map = map.set_door_passable(door, false).map_err(|e| match e {
            MapError::UnknownDoor(d) => Fail::input(format!("unknown door: {d}")),
            other => Fail::input(other.to_string()),
        })?;
    }
    match plan_path(&map, start, &parse_goal(goal)) {
        Ok(p) => {
            match format {
                Format::Human => say(io, &p)?,
                Format::Json => emit_json(io, &p)?,
            }
            Ok(EXIT_OK)
        }
        Err(NavError::NoPath) => Err(Fail::failure(NavError::NoPath.to_string())),
        Err(e) => Err(Fail::input(e.to_string())),
    }
}

/// Answers from `--answer` flags first, then the console when interactive.
struct ConsoleAnswers<'a, 'b> {
    queued: std::collections::VecDeque<String>,
    io: &'a mut Io<'b>,
    asked: usize,
}

impl AnswerProvider for ConsoleAnswers<'_, '_> {
    fn answer(&mut self, clarification: &Clarification) -> Option<String> {
        self.asked += 1;
        if let Some(a) = self.queued.pop_front() {
            return Some(a);
        }
        if !self.io.interactive {
            return None;
        }
        let _ = write!(self.io.err, "{} ", clarification.question);
        let _ = self.io.err.flush();
        let mut line = String::new();
        match self.io.stdin.read_line(&mut line) {
            Ok(0) | Err(_) => None,
            Ok(_) => Some(line.trim().to_string()),
        }
    }
}

#[derive(Serialize)]
struct TaskReport<'a> {
    command: &'a Command,
    plan: &'a PlanTrace,
    execution: &'a ExecTrace,
    #[serde(skip_serializing_if = "Option::is_none")]
    goal_met: Option<bool>,
}

fn plan_failure(e: PlanError) -> Fail {
    match e {
        PlanError::UnresolvedAmbiguity(_)
        | PlanError::InvalidMaxSteps
        | PlanError::Scorer(ScorerError::ConfigMissing(_)) => Fail::input(e.to_string()),
        _ => Fail::failure(e.to_string()),
    }
}

fn plan_task_cmd(io: &mut Io, args: PlanTaskArgs) -> CmdResult {
    let map = load_map(&args.map)?;
    let world = load_world(&args.world, &map)?;

    let (scorer, scenario_command): (Box<dyn Scorer>, Option<String>) = match &args.scripted {
        Some(path) => {
            let scripted = ScriptedScorer::from_json(&read(path)?)
                .map_err(|e| Fail::input(format!("{}: {e}", path.display())))?;
            let command = scripted.scenario().command.clone();
            (Box::new(scripted), Some(command))
        }
        None => {
            let llm = LlmScorer::new(LlmConfig::from_env()).map_err(|e| Fail::input(e.to_string()))?;
            (Box::new(llm), None)
        }
    };
    let raw = args
        .command
        .or(scenario_command)
        .ok_or_else(|| Fail::input("--command is required with --llm"))?;

    let interactive = io.interactive && !args.non_interactive;
    let saved = io.interactive;
    io.interactive = interactive;
    let mut answers = ConsoleAnswers { queued: args.answers.into(), io, asked: 0 };
    let resolved = resolve_ambiguity(&raw, &mut answers);
    let io = answers.io;
    io.interactive = saved;
    let command = resolved.map_err(|e| plan_failure(e.into()))?;

    let skills = SkillSet::ground(&map, &command.resolved);
    let trace = plan_task(&skills, &command, scorer.as_ref(), args.max_steps).map_err(plan_failure)?;
    let exec = run_plan(&map, &world, &trace.skills());
    let goal_met = args.goal.as_ref().map(|g| check_goal(&exec.final_world, g));

    match args.format {
        Format::Json => emit_json(io, &TaskReport { command: &command, plan: &trace, execution: &exec, goal_met })?,
        Format::Human => {
            say(io, format!("command: {}", command.resolved))?;
            for s in &command.substitutions {
                say(io, format!("  clarified {:?} -> {:?}", s.token, s.answer))?;
            }
            say(io, format!("plan ({}):", trace.template))?;
            for (i, step) in trace.steps.iter().enumerate() {
                say(io, format!("  {}. {} (p={:.6})", i + 1, step.skill, step.scores[&step.skill]))?;
            }
            write_exec(io, &exec)?;
            if let (Some(g), Some(met)) = (&args.goal, goal_met) {
                say(io, format!("goal {g}: {}", if met { "met" } else { "not met" }))?;
            }
        }
    }
    Ok(if exec.all_ok() && goal_met != Some(false) { EXIT_OK } else { EXIT_FAILURE })
}

fn write_exec(io: &mut Io, exec: &ExecTrace) -> Result<(), Fail> {
    say(io, "execution:")?;
    for (i, step) in exec.steps.iter().enumerate() {
        let outcome = match &step.outcome {
            Outcome::Ok => "ok".to_string(),
            Outcome::Failed(reason) => format!("FAILED {reason}"),
        };
        say(io, format!("  {}. {} {outcome}", i + 1, step.skill))?;
    }
    Ok(())
}

fn sim_run(
    io: &mut Io,
    map_path: &FsPath,
    world_path: &FsPath,
    plan_path: &FsPath,
    goal: Option<&GoalSpec>,
    format: Format,
) -> CmdResult {
    let map = load_map(map_path)?;
    let world = load_world(world_path, &map)?;
    let plan: Vec<SkillInstance> = serde_json::from_str(&read(plan_path)?)
        .map_err(|e| Fail::input(format!("{}: {e}", plan_path.display())))?;
    let exec = run_plan(&map, &world, &plan);
    let goal_met = goal.map(|g| check_goal(&exec.final_world, g));

    #[derive(Serialize)]
    struct SimReport<'a> {
        execution: &'a ExecTrace,
        #[serde(skip_serializing_if = "Option::is_none")]
        goal_met: Option<bool>,
    }
    match format {
        Format::Json => emit_json(io, &SimReport { execution: &exec, goal_met })?,
        Format::Human => {
            write_exec(io, &exec)?;
            if let (Some(g), Some(met)) = (goal, goal_met) {
                say(io, format!("goal {g}: {}", if met { "met" } else { "not met" }))?;
            }
        }
    }
    Ok(if exec.all_ok() && goal_met != Some(false) { EXIT_OK } else { EXIT_FAILURE })
}
