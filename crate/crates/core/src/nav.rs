//! Room-level path planning over the door graph.
//!
//! Nodes are the start, the goal, and every passable door. Two nodes are joined
//! when they share a room, weighted by the straight-line distance between their
//! anchors. Closing a door removes its node, which is all replanning needs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{euclidean, Point2};
use crate::map::{MapError, SemanticMap};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeKind {
    Start,
    Goal,
    Door { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NavNode {
    #[serde(flatten)]
    pub kind: NodeKind,
    pub anchor: Point2,
    /// Sorted room names the node belongs to.
    pub rooms: Vec<String>,
}

impl NavNode {
    pub fn door_name(&self) -> Option<&str> {
        match &self.kind {
            NodeKind::Door { name } => Some(name),
            _ => None,
        }
    }

    fn shares_room(&self, other: &NavNode) -> bool {
        self.rooms.iter().any(|r| other.rooms.contains(r))
    }
}

/// Where a navigation request should end.
#[derive(Debug, Clone, PartialEq)]
pub enum Goal {
    Furniture(String),
    Point(Point2),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Start,
    Goal,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endpoint::Start => "start",
            Endpoint::Goal => "goal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NavError {
    #[error("{0} lies outside every room")]
    OutsideArena(Endpoint),
    #[error("no path: goal room unreachable through passable doors")]
    NoPath,
    #[error("unknown furniture: {0}")]
    UnknownFurniture(String),
    #[error("unknown door: {0}")]
    UnknownDoor(String),
}

#[derive(Debug, Clone)]
pub struct DoorGraph {
    nodes: Vec<NavNode>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

const START: usize = 0;
const GOAL: usize = 1;

impl DoorGraph {
    /// Node 0 is the start, node 1 the goal, doors follow in name order.
    pub fn nodes(&self) -> &[NavNode] {
        &self.nodes
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    /// Undirected edges as `(i, j, weight)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |(j, _)| i < *j).map(move |&(j, w)| (i, j, w)))
            .collect()
    }
}

pub fn build_door_graph(
    map: &SemanticMap,
    start: Point2,
    goal_anchor: Point2,
) -> Result<DoorGraph, NavError> {
    let start_room = map.room_of(start).ok_or(NavError::OutsideArena(Endpoint::Start))?;
    let goal_room = map.room_of(goal_anchor).ok_or(NavError::OutsideArena(Endpoint::Goal))?;

    let mut nodes = vec![
        NavNode { kind: NodeKind::Start, anchor: start, rooms: vec![start_room.to_string()] },
        NavNode { kind: NodeKind::Goal, anchor: goal_anchor, rooms: vec![goal_room.to_string()] },
    ];
    nodes.extend(map.doors().iter().filter(|d| d.passable).map(|d| NavNode {
        kind: NodeKind::Door { name: d.name.clone() },
        anchor: d.position,
        rooms: d.connects.to_vec(),
    }));

    let mut adjacency = vec![Vec::new(); nodes.len()];
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            if nodes[i].shares_room(&nodes[j]) {
                let w = euclidean(nodes[i].anchor, nodes[j].anchor);
                adjacency[i].push((j, w));
                adjacency[j].push((i, w));
            }
        }
    }
    Ok(DoorGraph { nodes, adjacency })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub waypoints: Vec<NavNode>,
    pub length: f64,
}

impl Path {
    pub fn doors(&self) -> impl Iterator<Item = &str> {
        self.waypoints.iter().filter_map(NavNode::door_name)
    }

    /// Structural check of every path invariant against `map`.
    pub fn check(&self, map: &SemanticMap) -> Result<(), String> {
        let (first, last) = match (self.waypoints.first(), self.waypoints.last()) {
            (Some(f), Some(l)) if self.waypoints.len() >= 2 => (f, l),
            _ => return Err("path needs at least start and goal".into()),
        };
        if first.kind != NodeKind::Start || last.kind != NodeKind::Goal {
            return Err("path must run from start to goal".into());
        }
        let inner = &self.waypoints[1..self.waypoints.len() - 1];
        for node in inner {
            let name = node.door_name().ok_or("intermediate waypoint is not a door")?;
            let door = map.door(name).ok_or_else(|| format!("unknown door {name}"))?;
            if !door.passable {
                return Err(format!("door {name} is impassable"));
            }
        }
        for pair in self.waypoints.windows(2) {
            if !pair[0].shares_room(&pair[1]) {
                return Err("consecutive waypoints share no room".into());
            }
        }
        if path_length(self) != self.length {
            return Err("stored length differs from segment sum".into());
        }
        Ok(())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for node in &self.waypoints {
            let label = match &node.kind {
                NodeKind::Start => "start".to_string(),
                NodeKind::Goal => "goal".to_string(),
                NodeKind::Door { name } => format!("door {name}"),
            };
            writeln!(f, "{label} {} [{}]", node.anchor, node.rooms.join(", "))?;
        }
        write!(f, "length: {:.6}", self.length)
    }
}

/// Σ euclidean distance between consecutive waypoint anchors.
pub fn path_length(path: &Path) -> f64 {
    path.waypoints
        .windows(2)
        .map(|w| euclidean(w[0].anchor, w[1].anchor))
        .fold(0.0, |acc, d| acc + d)
}

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
struct Label {
    dist: f64,
    /// Door node indices along the path; index order matches name order.
    doors: Vec<usize>,
}

impl Label {
    fn better_than(&self, other: &Label) -> bool {
        if same_length(self.dist, other.dist) {
            self.doors < other.doors
        } else {
            self.dist < other.dist
        }
    }
}

#[derive(Debug, PartialEq)]
struct Entry {
    label: Label,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, door sequence)
        other
            .label
            .dist
            .total_cmp(&self.label.dist)
            .then_with(|| other.label.doors.cmp(&self.label.doors))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from start to goal. Equal-length routes resolve to the
/// lexicographically smallest door-name sequence.
pub fn shortest_path(graph: &DoorGraph) -> Result<Path, NavError> {
    let n = graph.nodes.len();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    let origin = Label { dist: 0.0, doors: Vec::new() };
    best[START] = Some(origin.clone());
    heap.push(Entry { label: origin, node: START });

    while let Some(Entry { label, node }) = heap.pop() {
        if best[node].as_ref() != Some(&label) {
            continue;
        }
        if node == GOAL {
            continue;
        }
        for &(next, w) in graph.neighbors(node) {
            if next == START {
                continue;
            }
            let mut doors = label.doors.clone();
            if next != GOAL {
                if doors.contains(&next) {
                    continue;
                }
                doors.push(next);
            }
            let cand = Label { dist: label.dist + w, doors };
            if best[next].as_ref().is_none_or(|b| cand.better_than(b)) {
                best[next] = Some(cand.clone());
                heap.push(Entry { label: cand, node: next });
            }
        }
    }

    let found = best[GOAL].take().ok_or(NavError::NoPath)?;
    let mut waypoints = Vec::with_capacity(found.doors.len() + 2);
    waypoints.push(graph.nodes[START].clone());
    waypoints.extend(found.doors.iter().map(|&i| graph.nodes[i].clone()));
    waypoints.push(graph.nodes[GOAL].clone());
    let mut path = Path { waypoints, length: 0.0 };
    path.length = path_length(&path);
    Ok(path)
}

pub fn resolve_goal(map: &SemanticMap, goal: &Goal) -> Result<Point2, NavError> {
    match goal {
        Goal::Point(p) => Ok(*p),
        Goal::Furniture(name) => map.furniture_anchor(name).map_err(|e| match e {
            MapError::UnknownFurniture(n) => NavError::UnknownFurniture(n),
            other => unreachable!("furniture lookup returned {other}"),
        }),
    }
}

pub fn plan_path(map: &SemanticMap, start: Point2, goal: &Goal) -> Result<Path, NavError> {
    let anchor = resolve_goal(map, goal)?;
    let graph = build_door_graph(map, start, anchor)?;
    shortest_path(&graph)
}

/// Marks `closed_door` impassable and plans again from `current`.
pub fn replan(
    map: &SemanticMap,
    current: Point2,
    goal: &Goal,
    closed_door: &str,
) -> Result<Path, NavError> {
    let closed = map
        .set_door_passable(closed_door, false)
        .map_err(|_| NavError::UnknownDoor(closed_door.to_string()))?;
    plan_path(&closed, current, goal)
}
