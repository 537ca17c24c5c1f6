//! Shared oracles, generators, and a mock completions server for the
//! integration tests. The oracles deliberately avoid the crate's own geometry
//! and graph code.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use rand::Rng;
use serde_json::{json, Value};

pub type Pt = [f64; 2];

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Every `*.json` file directly inside a fixture directory, sorted.
pub fn fixture_files(dir: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(fixture(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    out
}

// ---------------------------------------------------------------- geometry

/// Even-odd ray casting along +x.
pub fn ray_cast_inside(p: Pt, poly: &[Pt]) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x_cross = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
            if p[0] < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn seg_dist(p: Pt, a: Pt, b: Pt) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) };
    let (qx, qy) = (a[0] + t * dx, a[1] + t * dy);
    ((p[0] - qx).powi(2) + (p[1] - qy).powi(2)).sqrt()
}

pub fn edge_dist(p: Pt, poly: &[Pt]) -> f64 {
    (0..poly.len())
        .map(|i| seg_dist(p, poly[i], poly[(i + 1) % poly.len()]))
        .fold(f64::INFINITY, f64::min)
}

pub fn dist(a: Pt, b: Pt) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Star-shaped simple polygon around a random centre, either orientation.
pub fn random_star_polygon<R: Rng>(rng: &mut R) -> Vec<Pt> {
    let n = rng.gen_range(3..=12);
    let (cx, cy) = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
    let scale = rng.gen_range(0.5..20.0);
    // distinct angles at least a few degrees apart keep the outline simple
    let mut angles: Vec<f64> = Vec::with_capacity(n);
    let step = std::f64::consts::TAU / n as f64;
    for i in 0..n {
        angles.push(i as f64 * step + rng.gen_range(0.1..0.9) * step);
    }
    let mut poly: Vec<Pt> = angles
        .iter()
        .map(|a| {
            let r = scale * rng.gen_range(0.2..1.0);
            [cx + r * a.cos(), cy + r * a.sin()]
        })
        .collect();
    if rng.gen_bool(0.5) {
        poly.reverse();
    }
    poly
}

/// Random point in the (slightly grown) bounding box, at least `clearance`
/// away from every edge.
pub fn random_probe<R: Rng>(rng: &mut R, poly: &[Pt], clearance: f64) -> Pt {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in poly {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let pad = [(hi[0] - lo[0]) * 0.1, (hi[1] - lo[1]) * 0.1];
    loop {
        let p = [rng.gen_range(lo[0] - pad[0]..hi[0] + pad[0]), rng.gen_range(lo[1] - pad[1]..hi[1] + pad[1])];
        if edge_dist(p, poly) >= clearance {
            return p;
        }
    }
}

/// Shoelace area and centroid.
pub fn shoelace(poly: &[Pt]) -> (f64, Pt) {
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let c = p[0] * q[1] - q[0] * p[1];
        a += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    let a = a / 2.0;
    (a, [cx / (6.0 * a), cy / (6.0 * a)])
}

// ---------------------------------------------------------------- maps

#[derive(Debug, Clone)]
pub struct OracleDoor {
    pub name: String,
    pub position: Pt,
    pub rooms: [String; 2],
    pub passable: bool,
}

/// Plain-data mirror of a map, used by the brute-force path oracle.
#[derive(Debug, Clone)]
pub struct OracleMap {
    pub rooms: Vec<(String, Vec<Pt>)>,
    pub doors: Vec<OracleDoor>,
}

impl OracleMap {
    pub fn to_json(&self) -> String {
        let rooms: Vec<Value> =
            self.rooms.iter().map(|(n, c)| json!({"name": n, "contour": c})).collect();
        let doors: Vec<Value> = self
            .doors
            .iter()
            .map(|d| json!({"name": d.name, "position": d.position, "connects": d.rooms, "passable": d.passable}))
            .collect();
        json!({"rooms": rooms, "furniture": [], "doors": doors}).to_string()
    }

    /// First room by name whose interior holds `p`.
    pub fn room_of(&self, p: Pt) -> Option<&str> {
        let mut names: Vec<&(String, Vec<Pt>)> = self.rooms.iter().collect();
        names.sort_by(|a, b| a.0.cmp(&b.0));
        names.into_iter().find(|(_, c)| ray_cast_inside(p, c)).map(|(n, _)| n.as_str())
    }

    pub fn with_door_closed(&self, name: &str) -> Self {
        let mut out = self.clone();
        for d in &mut out.doors {
            if d.name == name {
                d.passable = false;
            }
        }
        out
    }

    /// Shortest start -> doors -> goal length over every simple sequence of
    /// passable doors in which consecutive stops share a room.
    pub fn brute_force(&self, start: Pt, goal: Pt) -> Option<f64> {
        let start_room = self.room_of(start)?.to_string();
        let goal_room = self.room_of(goal)?.to_string();
        let mut best: Option<f64> = None;
        let mut used = vec![false; self.doors.len()];
        self.extend(start, &[start_room], &goal_room, goal, 0.0, &mut used, &mut best);
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        at: Pt,
        rooms: &[String],
        goal_room: &str,
        goal: Pt,
        so_far: f64,
        used: &mut [bool],
        best: &mut Option<f64>,
    ) {
        if rooms.iter().any(|r| r == goal_room) {
            let total = so_far + dist(at, goal);
            if best.is_none_or(|b| total < b) {
                *best = Some(total);
            }
        }
        for i in 0..self.doors.len() {
            let d = &self.doors[i];
            if used[i] || !d.passable || !d.rooms.iter().any(|r| rooms.contains(r)) {
                continue;
            }
            used[i] = true;
            self.extend(d.position, &d.rooms, goal_room, goal, so_far + dist(at, d.position), used, best);
            used[i] = false;
        }
    }
}

/// A grid of rectangular rooms with random cell sizes and up to `max_doors`
/// doors on shared walls (parallel doors allowed, some closed).
pub fn random_grid_map<R: Rng>(rng: &mut R, max_doors: usize) -> OracleMap {
    let rows = rng.gen_range(1..=3);
    let cols = rng.gen_range(2..=3);
    let mut xs = vec![0.0];
    for _ in 0..cols {
        xs.push(xs.last().unwrap() + rng.gen_range(2.0..7.0));
    }
    let mut ys = vec![0.0];
    for _ in 0..rows {
        ys.push(ys.last().unwrap() + rng.gen_range(2.0..7.0));
    }
    let name = |r: usize, c: usize| format!("room_{r}_{c}");
    let mut rooms = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let (x0, x1, y0, y1) = (xs[c], xs[c + 1], ys[r], ys[r + 1]);
            rooms.push((name(r, c), vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]));
        }
    }
    // shared walls as (room, room, fixed coordinate, span, vertical?)
    let mut walls = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                walls.push((name(r, c), name(r, c + 1), xs[c + 1], (ys[r], ys[r + 1]), true));
            }
            if r + 1 < rows {
                walls.push((name(r, c), name(r + 1, c), ys[r + 1], (xs[c], xs[c + 1]), false));
            }
        }
    }
    let n_doors = rng.gen_range(0..=max_doors);
    let mut doors = Vec::new();
    for i in 0..n_doors {
        let (a, b, fixed, (lo, hi), vertical) = walls[rng.gen_range(0..walls.len())].clone();
        let along = rng.gen_range(lo + 0.2..hi - 0.2);
        let position = if vertical { [fixed, along] } else { [along, fixed] };
        doors.push(OracleDoor { name: format!("door_{i}"), position, rooms: [a, b], passable: rng.gen_bool(0.8) });
    }
    OracleMap { rooms, doors }
}

/// Random point strictly inside a random room, `margin` from its walls.
pub fn random_interior<R: Rng>(rng: &mut R, map: &OracleMap, margin: f64) -> Pt {
    let (_, c) = &map.rooms[rng.gen_range(0..map.rooms.len())];
    let (x0, y0, x1, y1) = (c[0][0], c[0][1], c[2][0], c[2][1]);
    [rng.gen_range(x0 + margin..x1 - margin), rng.gen_range(y0 + margin..y1 - margin)]
}

// ---------------------------------------------------------------- scenarios

#[derive(Debug, Clone)]
pub struct GoldenScenario {
    pub name: String,
    pub answers: Vec<String>,
    pub plan: Vec<String>,
    pub goal: Option<String>,
}

pub fn golden_scenarios() -> Vec<GoldenScenario> {
    let doc: BTreeMap<String, Value> = serde_json::from_str(&read_fixture("golden_scenarios.json")).unwrap();
    doc.into_iter()
        .map(|(name, v)| {
            let strings = |key: &str| -> Vec<String> {
                v[key].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
            };
            GoldenScenario {
                answers: strings("answers"),
                plan: strings("plan"),
                goal: v["goal"].as_str().map(str::to_string),
                name,
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub command: String,
    pub answers: Vec<String>,
    pub ambiguous: usize,
    pub resolved: String,
}

/// Hand-labelled clarification corpus.
pub fn ambiguity_corpus() -> Vec<CorpusEntry> {
    let doc: Vec<Value> = serde_json::from_str(&read_fixture("ambiguity_corpus.json")).unwrap();
    doc.iter()
        .map(|v| CorpusEntry {
            command: v["command"].as_str().unwrap().to_string(),
            answers: v["answers"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect(),
            ambiguous: v["ambiguous"].as_u64().unwrap() as usize,
            resolved: v["resolved"].as_str().unwrap().to_string(),
        })
        .collect()
}

// ---------------------------------------------------------------- mock server

pub struct Request {
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Request {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }

    pub fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or(Value::Null)
    }
}

type Handler = dyn Fn(usize, &Request) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server; one request per connection.
pub struct MockServer {
    pub url: String,
    hits: Arc<AtomicUsize>,
    requests: Arc<Mutex<Vec<Request>>>,
}

impl MockServer {
    /// `handler(n, request)` sees the zero-based request count.
    pub fn start<F>(handler: F) -> Self
    where
        F: Fn(usize, &Request) -> (u16, String) + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let requests = Arc::new(Mutex::new(Vec::new()));
        let handler: Arc<Handler> = Arc::new(handler);
        let (h, r) = (hits.clone(), requests.clone());
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let (hits, requests, handler) = (h.clone(), r.clone(), handler.clone());
                thread::spawn(move || {
                    let mut reader = BufReader::new(stream.try_clone().unwrap());
                    let Some(req) = read_request(&mut reader) else { return };
                    let n = hits.fetch_add(1, Ordering::SeqCst);
                    let (status, body) = handler(n, &req);
                    requests.lock().unwrap().push(req);
                    let mut stream = stream;
                    let _ = write!(
                        stream,
                        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                        body.len()
                    );
                    let _ = stream.flush();
                });
            }
        });
        Self { url, hits, requests }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn bodies(&self) -> Vec<Value> {
        self.requests.lock().unwrap().iter().map(Request::json).collect()
    }

    pub fn authorizations(&self) -> Vec<String> {
        self.requests.lock().unwrap().iter().filter_map(|r| r.header("authorization").map(str::to_string)).collect()
    }
}

fn read_request(reader: &mut impl BufRead) -> Option<Request> {
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    let mut headers = Vec::new();
    loop {
        line.clear();
        reader.read_line(&mut line).ok()?;
        let trimmed = line.trim_end();
        if trimmed.is_empty() {
            break;
        }
        let (k, v) = trimmed.split_once(':')?;
        headers.push((k.trim().to_string(), v.trim().to_string()));
    }
    let len: usize = headers
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case("content-length"))
        .and_then(|(_, v)| v.parse().ok())
        .unwrap_or(0);
    let mut body = vec![0; len];
    reader.read_exact(&mut body).ok()?;
    Some(Request { headers, body: String::from_utf8(body).ok()? })
}

/// Echo-style completion reply: the prompt prefix is one token without a
/// logprob, the candidate text after the final `". "` is split into
/// `logprobs.len()` tokens carrying the given values.
pub fn echo_reply(prompt: &str, logprobs: &[f64]) -> String {
    let cut = prompt.rfind(". ").map(|i| i + 2).unwrap_or(0);
    let (prefix, candidate) = prompt.split_at(cut);
    let chars: Vec<char> = candidate.chars().collect();
    let k = logprobs.len().max(1);
    let mut tokens = vec![prefix.to_string()];
    let mut offsets = vec![0usize];
    let mut values: Vec<Value> = vec![Value::Null];
    let mut at = prefix.chars().count();
    let chunk = chars.len().div_ceil(k);
    for (i, piece) in chars.chunks(chunk.max(1)).enumerate() {
        tokens.push(piece.iter().collect());
        offsets.push(at);
        values.push(json!(logprobs.get(i).copied().unwrap_or(0.0)));
        at += piece.len();
    }
    json!({"choices": [{"text": prompt, "logprobs": {
        "tokens": tokens, "token_logprobs": values, "text_offset": offsets}}]})
    .to_string()
}

/// The candidate a completion request is scoring.
pub fn candidate_of(body: &Value) -> String {
    let prompt = body["prompt"].as_str().unwrap_or_default();
    let cut = prompt.rfind(". ").map(|i| i + 2).unwrap_or(0);
    prompt[cut..].to_string()
}

// ---------------------------------------------------------------- cli

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn semplan(args: &[&str]) -> Run {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_semplan"))
        .args(args)
        .env_remove("SEMPLAN_LLM_ENDPOINT")
        .env_remove("SEMPLAN_LLM_KEY")
        .env_remove("SEMPLAN_LLM_MODEL")
        .stdin(std::process::Stdio::null())
        .output()
        .expect("spawn semplan");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}
