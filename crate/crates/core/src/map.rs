//! Labeled environment model: rooms, furniture, and doors.
//!
//! A map is loaded from a JSON document, validated in full, and then treated as
//! an immutable value. Entities are kept sorted by name so that equality and the
//! canonical serialization do not depend on document order.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, Containment, GeometryError, Point2, Polygon2, PolygonDefect};

#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub name: String,
    pub contour: Polygon2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Furniture {
    pub name: String,
    pub room: String,
    pub contour: Polygon2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Door {
    pub name: String,
    pub position: Point2,
    /// The two rooms joined by the door, stored in sorted order.
    pub connects: [String; 2],
    pub passable: bool,
}

impl Door {
    pub fn connects_room(&self, room: &str) -> bool {
        self.connects.iter().any(|r| r == room)
    }

    /// The room on the other side of the door from `room`.
    pub fn other_side(&self, room: &str) -> Option<&str> {
        match &self.connects {
            [a, b] if a == room => Some(b),
            [a, b] if b == room => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticMap {
    rooms: Vec<Room>,
    furniture: Vec<Furniture>,
    doors: Vec<Door>,
}

/// Where a point sits in symbolic terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SemanticLocation {
    pub room: Option<String>,
    pub furniture: Option<String>,
}

impl fmt::Display for SemanticLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.room, &self.furniture) {
            (Some(room), Some(furn)) => write!(f, "{room}/{furn}"),
            (Some(room), None) => f.write_str(room),
            _ => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationReason {
    NoRooms,
    EmptyName,
    DuplicateName,
    UnknownRoom(String),
    InvalidPolygon(PolygonDefect),
    DegenerateContour,
    FurnitureOutsideRoom(String),
    DoorConnectsSameRoom,
    NonFinitePosition,
}

impl fmt::Display for ValidationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationReason::NoRooms => f.write_str("map has no rooms"),
            ValidationReason::EmptyName => f.write_str("empty name"),
            ValidationReason::DuplicateName => f.write_str("duplicate name"),
            ValidationReason::UnknownRoom(_) => f.write_str("unknown room"),
            ValidationReason::InvalidPolygon(d) => write!(f, "invalid contour ({d})"),
            ValidationReason::DegenerateContour => f.write_str("contour has no area"),
            ValidationReason::FurnitureOutsideRoom(room) => {
                write!(f, "centroid lies outside room {room}")
            }
            ValidationReason::DoorConnectsSameRoom => f.write_str("door connects a room to itself"),
            ValidationReason::NonFinitePosition => f.write_str("position is not finite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{entity}: {reason}")]
pub struct ValidationError {
    pub entity: String,
    pub reason: ValidationReason,
}

/// Non-fatal findings reported alongside a valid map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationWarning {
    DoorOutsideRooms { door: String },
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationWarning::DoorOutsideRooms { door } => {
                write!(f, "{door}: position lies outside both connected rooms")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(ValidationError),
    #[error("unknown door: {0}")]
    UnknownDoor(String),
    #[error("unknown furniture: {0}")]
    UnknownFurniture(String),
    #[error("unknown room: {0}")]
    UnknownRoom(String),
}

/// Every violation and warning found in a map document.
#[derive(Debug, Clone, Default)]
pub struct MapReport {
    pub errors: Vec<ValidationError>,
    pub warnings: Vec<ValidationWarning>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    rooms: Vec<RawRoom>,
    #[serde(default)]
    furniture: Vec<RawFurniture>,
    #[serde(default)]
    doors: Vec<RawDoor>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoom {
    name: String,
    contour: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFurniture {
    name: String,
    room: String,
    contour: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoor {
    name: String,
    position: [f64; 2],
    connects: [String; 2],
    #[serde(default = "default_passable")]
    passable: bool,
}

fn default_passable() -> bool {
    true
}

/// Parses and validates a map document.
pub fn load_map<R: Read>(mut reader: R) -> Result<SemanticMap, MapError> {
    let mut doc = String::new();
    reader
        .read_to_string(&mut doc)
        .map_err(|e| MapError::Parse(e.to_string()))?;
    SemanticMap::from_json(&doc)
}

/// Canonical serialization; see [`SemanticMap::to_canonical_json`].
pub fn save_map(map: &SemanticMap) -> String {
    map.to_canonical_json()
}

/// Validates a document and collects every problem instead of stopping at the first.
pub fn check_document(doc: &str) -> Result<MapReport, MapError> {
    let raw: RawMap = serde_json::from_str(doc).map_err(|e| MapError::Parse(e.to_string()))?;
    Ok(match build(raw) {
        Ok((_, warnings)) => MapReport { errors: Vec::new(), warnings },
        Err(errors) => MapReport { errors, warnings: Vec::new() },
    })
}

fn to_polygon(raw: Vec<[f64; 2]>) -> Result<Polygon2, ValidationReason> {
    let contour = Polygon2::new(raw.into_iter().map(Point2::from).collect()).map_err(|e| match e {
        GeometryError::InvalidPolygon(d) => ValidationReason::InvalidPolygon(d),
        GeometryError::DegeneratePolygon => ValidationReason::DegenerateContour,
        GeometryError::NonFinite => ValidationReason::InvalidPolygon(PolygonDefect::NonFinite),
    })?;
    if contour.signed_area() < geometry::MIN_CENTROID_AREA {
        return Err(ValidationReason::DegenerateContour);
    }
    Ok(contour)
}

fn check_names<'a>(
    names: impl Iterator<Item = &'a str>,
    errors: &mut Vec<ValidationError>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    for name in names {
        if name.trim().is_empty() {
            errors.push(ValidationError {
                entity: name.to_string(),
                reason: ValidationReason::EmptyName,
            });
        } else if !seen.insert(name) {
            errors.push(ValidationError {
                entity: name.to_string(),
                reason: ValidationReason::DuplicateName,
            });
        }
    }
    seen
}

fn build(raw: RawMap) -> Result<(SemanticMap, Vec<ValidationWarning>), Vec<ValidationError>> {
    let mut errors = Vec::new();
    let fail = |errors: &mut Vec<ValidationError>, entity: &str, reason| {
        errors.push(ValidationError { entity: entity.to_string(), reason })
    };

    if raw.rooms.is_empty() {
        fail(&mut errors, "rooms", ValidationReason::NoRooms);
    }
    let room_names = check_names(raw.rooms.iter().map(|r| r.name.as_str()), &mut errors);
    check_names(raw.furniture.iter().map(|f| f.name.as_str()), &mut errors);
    check_names(raw.doors.iter().map(|d| d.name.as_str()), &mut errors);
    let room_names: BTreeSet<String> = room_names.into_iter().map(str::to_string).collect();

    let mut rooms = Vec::new();
    for r in raw.rooms {
        match to_polygon(r.contour) {
            Ok(contour) => rooms.push(Room { name: r.name, contour }),
            Err(reason) => fail(&mut errors, &r.name, reason),
        }
    }

    let mut furniture = Vec::new();
    for f in raw.furniture {
        if !room_names.contains(&f.room) {
            fail(&mut errors, &f.name, ValidationReason::UnknownRoom(f.room));
            continue;
        }
        let contour = match to_polygon(f.contour) {
            Ok(c) => c,
            Err(reason) => {
                fail(&mut errors, &f.name, reason);
                continue;
            }
        };
        if let Some(room) = rooms.iter().find(|r| r.name == f.room) {
            // to_polygon guarantees a usable area, so the centroid exists
            let c = contour.centroid().expect("validated contour");
            if !room.contour.contains(c).is_covered() {
                fail(&mut errors, &f.name, ValidationReason::FurnitureOutsideRoom(f.room.clone()));
                continue;
            }
        }
        furniture.push(Furniture { name: f.name, room: f.room, contour });
    }

    let mut doors = Vec::new();
    for d in raw.doors {
        let position = Point2::from(d.position);
        if !position.is_finite() {
            fail(&mut errors, &d.name, ValidationReason::NonFinitePosition);
            continue;
        }
        if let Some(missing) = d.connects.iter().find(|r| !room_names.contains(*r)) {
            fail(&mut errors, &d.name, ValidationReason::UnknownRoom(missing.clone()));
            continue;
        }
        if d.connects[0] == d.connects[1] {
            fail(&mut errors, &d.name, ValidationReason::DoorConnectsSameRoom);
            continue;
        }
        let mut connects = d.connects;
        connects.sort();
        doors.push(Door { name: d.name, position, connects, passable: d.passable });
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    rooms.sort_by(|a, b| a.name.cmp(&b.name));
    furniture.sort_by(|a, b| a.name.cmp(&b.name));
    doors.sort_by(|a, b| a.name.cmp(&b.name));
    let map = SemanticMap { rooms, furniture, doors };
    let warnings = map.warnings();
    Ok((map, warnings))
}

impl SemanticMap {
    pub fn from_json(doc: &str) -> Result<Self, MapError> {
        let raw: RawMap = serde_json::from_str(doc).map_err(|e| MapError::Parse(e.to_string()))?;
        build(raw)
            .map(|(map, _)| map)
            .map_err(|mut errs| MapError::Validation(errs.swap_remove(0)))
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    pub fn furniture(&self) -> &[Furniture] {
        &self.furniture
    }

    pub fn doors(&self) -> &[Door] {
        &self.doors
    }

    pub fn room(&self, name: &str) -> Option<&Room> {
        self.rooms.iter().find(|r| r.name == name)
    }

    pub fn furniture_named(&self, name: &str) -> Option<&Furniture> {
        self.furniture.iter().find(|f| f.name == name)
    }

    pub fn door(&self, name: &str) -> Option<&Door> {
        self.doors.iter().find(|d| d.name == name)
    }

    /// Doors whose position is outside both rooms they connect.
    pub fn warnings(&self) -> Vec<ValidationWarning> {
        self.doors
            .iter()
            .filter(|d| {
                d.connects.iter().all(|r| {
                    self.room(r)
                        .is_none_or(|room| room.contour.contains(d.position) == Containment::Outside)
                })
            })
            .map(|d| ValidationWarning::DoorOutsideRooms { door: d.name.clone() })
            .collect()
    }

    /// The room whose contour covers `p`; overlapping contours resolve to the
    /// lexicographically smallest name.
    pub fn room_of(&self, p: Point2) -> Option<&str> {
        // rooms are sorted, so the first hit is the smallest name
        self.rooms
            .iter()
            .find(|r| r.contour.contains(p).is_covered())
            .map(|r| r.name.as_str())
    }

    pub fn semantic_location(&self, p: Point2) -> SemanticLocation {
        let Some(room) = self.room_of(p) else {
            return SemanticLocation::default();
        };
        let furniture = self
            .furniture
            .iter()
            .filter(|f| f.room == room)
            .find(|f| f.contour.contains(p).is_covered())
            .map(|f| f.name.clone());
        SemanticLocation { room: Some(room.to_string()), furniture }
    }

    /// Returns a copy of the map with one door's passability changed.
    pub fn set_door_passable(&self, door: &str, passable: bool) -> Result<Self, MapError> {
        let mut next = self.clone();
        let d = next
            .doors
            .iter_mut()
            .find(|d| d.name == door)
            .ok_or_else(|| MapError::UnknownDoor(door.to_string()))?;
        d.passable = passable;
        Ok(next)
    }

    /// Approach point for a furniture goal: the centroid of its contour.
    pub fn furniture_anchor(&self, name: &str) -> Result<Point2, MapError> {
        let f = self
            .furniture_named(name)
            .ok_or_else(|| MapError::UnknownFurniture(name.to_string()))?;
        Ok(f.contour.centroid().expect("validated contour"))
    }

    pub fn room_anchor(&self, name: &str) -> Result<Point2, MapError> {
        let r = self.room(name).ok_or_else(|| MapError::UnknownRoom(name.to_string()))?;
        Ok(r.contour.centroid().expect("validated contour"))
    }

    /// Canonical document: entities sorted by name, keys in schema order,
    /// two-space indentation, shortest round-trip decimals, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let mut out = String::from("{\n");

        out.push_str("  \"rooms\": ");
        write_list(&mut out, &self.rooms, |out, r| {
            field(out, "name", &string(&r.name), false);
            field(out, "contour", &contour(&r.contour), true);
        });
        out.push_str(",\n  \"furniture\": ");
        write_list(&mut out, &self.furniture, |out, f| {
            field(out, "name", &string(&f.name), false);
            field(out, "room", &string(&f.room), false);
            field(out, "contour", &contour(&f.contour), true);
        });
        out.push_str(",\n  \"doors\": ");
        write_list(&mut out, &self.doors, |out, d| {
            field(out, "name", &string(&d.name), false);
            field(out, "position", &point(d.position), false);
            let connects = format!("[{}, {}]", string(&d.connects[0]), string(&d.connects[1]));
            field(out, "connects", &connects, false);
            field(out, "passable", if d.passable { "true" } else { "false" }, true);
        });
        out.push_str("\n}\n");
        out
    }
}

fn write_list<T>(out: &mut String, items: &[T], mut body: impl FnMut(&mut String, &T)) {
    if items.is_empty() {
        out.push_str("[]");
        return;
    }
    out.push_str("[\n");
    for (i, item) in items.iter().enumerate() {
        out.push_str("    {\n");
        body(out, item);
        out.push_str("    }");
        if i + 1 < items.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]");
}

fn field(out: &mut String, key: &str, value: &str, last: bool) {
    let _ = writeln!(out, "      \"{key}\": {value}{}", if last { "" } else { "," });
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

pub(crate) fn number(v: f64) -> String {
    serde_json::to_string(&v).expect("finite floats serialize")
}

fn point(p: Point2) -> String {
    format!("[{}, {}]", number(p.x), number(p.y))
}

fn contour(poly: &Polygon2) -> String {
    let pts: Vec<String> = poly.vertices().iter().map(|&p| point(p)).collect();
    format!("[{}]", pts.join(", "))
}
