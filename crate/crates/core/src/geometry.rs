//! Planar primitives shared by the map, navigation, and simulator modules.
//!
//! All coordinates are meters in the map frame. Polygons are validated once on
//! construction and stored counter-clockwise, so every signed test downstream
//! uses one orientation convention.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Distance (m) within which a point counts as lying on a polygon edge.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// Polygons with an absolute area below this (m²) have no usable centroid.
pub const MIN_CENTROID_AREA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(GeometryError::NonFinite)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn translate(self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self::new(x, y)
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Why a raw vertex list was rejected as a polygon contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolygonDefect {
    TooFewVertices,
    DuplicateVertex,
    SelfIntersecting,
    NonFinite,
}

impl PolygonDefect {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolygonDefect::TooFewVertices => "TooFewVertices",
            PolygonDefect::DuplicateVertex => "DuplicateVertex",
            PolygonDefect::SelfIntersecting => "SelfIntersecting",
            PolygonDefect::NonFinite => "NonFinite",
        }
    }
}

impl fmt::Display for PolygonDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(PolygonDefect),
    #[error("degenerate polygon: area below {MIN_CENTROID_AREA} m²")]
    DegeneratePolygon,
    #[error("coordinate is not finite")]
    NonFinite,
}

/// Three-valued result of a containment query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

impl Containment {
    /// Inside or on the boundary.
    pub fn is_covered(self) -> bool {
        !matches!(self, Containment::Outside)
    }
}

/// A simple polygon contour, counter-clockwise, without repeated consecutive vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2 {
    vertices: Vec<Point2>,
}

impl Polygon2 {
    pub fn new(raw: Vec<Point2>) -> Result<Self, GeometryError> {
        validate_polygon(raw)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Iterates the closed edge loop, including the last-to-first edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Signed shoelace area; positive for the stored CCW orientation.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn contains(&self, p: Point2) -> Containment {
        point_in_polygon(p, self)
    }

    pub fn centroid(&self) -> Result<Point2, GeometryError> {
        centroid(self)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v.translate(dx, dy)).collect(),
        }
    }
}

/// z-component of `(a - origin) × (b - origin)`.
///
/// Positive iff `b` lies counter-clockwise of `a` as seen from `origin`.
pub fn cross(origin: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - origin.x) * (b.y - origin.y) - (a.y - origin.y) * (b.x - origin.x)
}

pub fn euclidean(a: Point2, b: Point2) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Shortest distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return euclidean(p, a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    euclidean(p, Point2::new(a.x + t * dx, a.y + t * dy))
}

/// Classifies `p` against `poly` with the winding number.
///
/// Each edge crossing the horizontal line through `p` contributes ±1 depending
/// on the sign of the outer product of the edge with `p`; a nonzero total
/// means the point is enclosed. Points within [`BOUNDARY_EPS`] of an edge
/// are reported as [`Containment::Boundary`] before the winding count runs.
pub fn point_in_polygon(p: Point2, poly: &Polygon2) -> Containment {
    if poly
        .edges()
        .any(|(a, b)| segment_distance(p, a, b) <= BOUNDARY_EPS)
    {
        return Containment::Boundary;
    }

    let mut winding = 0i32;
    for (a, b) in poly.edges() {
        if a.y <= p.y {
            if b.y > p.y && cross(a, b, p) > 0.0 {
                winding += 1;
            }
        } else if b.y <= p.y && cross(a, b, p) < 0.0 {
            winding -= 1;
        }
    }

    if winding != 0 {
        Containment::Inside
    } else {
        Containment::Outside
    }
}

/// Area-weighted centroid of a simple polygon.
pub fn centroid(poly: &Polygon2) -> Result<Point2, GeometryError> {
    let area = poly.signed_area();
    if area.abs() < MIN_CENTROID_AREA {
        return Err(GeometryError::DegeneratePolygon);
    }
    // Shift to the first vertex to keep the products small for far-off maps.
    let o = poly.vertices[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for (a, b) in poly.edges() {
        let (ax, ay) = (a.x - o.x, a.y - o.y);
        let (bx, by) = (b.x - o.x, b.y - o.y);
        let w = ax * by - bx * ay;
        cx += (ax + bx) * w;
        cy += (ay + by) * w;
    }
    let k = 1.0 / (6.0 * area);
    Ok(Point2::new(o.x + cx * k, o.y + cy * k))
}

/// Checks the contour invariants and returns the polygon in CCW order.
pub fn validate_polygon(raw: Vec<Point2>) -> Result<Polygon2, GeometryError> {
    let defect = |d| Err(GeometryError::InvalidPolygon(d));
    if raw.len() < 3 {
        return defect(PolygonDefect::TooFewVertices);
    }
    if raw.iter().any(|p| !p.is_finite()) {
        return defect(PolygonDefect::NonFinite);
    }
    let n = raw.len();
    if (0..n).any(|i| raw[i] == raw[(i + 1) % n]) {
        return defect(PolygonDefect::DuplicateVertex);
    }
    if is_self_intersecting(&raw) {
        return defect(PolygonDefect::SelfIntersecting);
    }

    let mut vertices = raw;
    if signed_area(&vertices) < 0.0 {
        vertices.reverse();
    }
    Ok(Polygon2 { vertices })
}

fn signed_area(v: &[Point2]) -> f64 {
    let n = v.len();
    let o = v[0];
    let mut twice = 0.0;
    for i in 0..n {
        twice += cross(o, v[i], v[(i + 1) % n]);
    }
    0.5 * twice
}

fn is_self_intersecting(v: &[Point2]) -> bool {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let (c, d) = (v[j], v[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Neighbouring edges share exactly one vertex; they only clash
                // when they fold back over each other.
                let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                if cross(shared, p, q) == 0.0 && same_direction(shared, p, q) {
                    return true;
                }
            } else if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

/// Both `p` and `q` lie on the same ray leaving `origin`.
fn same_direction(origin: Point2, p: Point2, q: Point2) -> bool {
    (p.x - origin.x) * (q.x - origin.x) + (p.y - origin.y) * (q.y - origin.y) > 0.0
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = cross(a, b, c);
    let d2 = cross(a, b, d);
    let d3 = cross(c, d, a);
    let d4 = cross(c, d, b);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, b, c))
        || (d2 == 0.0 && on_segment(a, b, d))
        || (d3 == 0.0 && on_segment(c, d, a))
        || (d4 == 0.0 && on_segment(c, d, b))
}

/// `p` is collinear with `[a, b]` and inside its bounding box.
fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}
