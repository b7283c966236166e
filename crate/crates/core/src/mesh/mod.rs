//! Planar meshed circuit models.
//!
//! Shapes are polygons over a shared vertex list. Coordinates are stored as
//! integer micrometres so that a move followed by its inverse restores the
//! mesh exactly. Every movable vertex admits four actions (up, down, left,
//! right) of a given magnitude.

mod geometry;
mod raster;

pub use geometry::{point_in_polygon, polygon_area_um2};
pub use raster::{rasterize, rasterize_in, Frame, Grid};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Micrometres per millimetre.
pub const UM_PER_MM: f64 = 1000.0;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("vertex {0} is not movable")]
    NotMovable(usize),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("action magnitude must be a positive multiple of 1 um, got {0} mm")]
    BadMagnitude(f64),
    #[error("rejected action: {}", format_violations(.0))]
    Rejected(Vec<Violation>),
    #[error("invalid mesh: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("degenerate raster frame")]
    DegenerateFrame,
    #[error("grid size must be at least 8, got {0}")]
    GridTooSmall(usize),
    #[error("mesh json: {0}")]
    Json(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    /// Unit displacement `(dx, dy)`.
    pub fn unit(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, 1),
            Direction::Down => (0, -1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        match s {
            "up" => Some(Direction::Up),
            "down" => Some(Direction::Down),
            "left" => Some(Direction::Left),
            "right" => Some(Direction::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Conductor role of a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolygonTag {
    #[serde(rename = "resonator-1")]
    Resonator1,
    #[serde(rename = "resonator-2")]
    Resonator2,
    #[serde(rename = "feed")]
    Feed,
    #[serde(rename = "patch")]
    Patch,
    #[serde(rename = "line-segment")]
    LineSegment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polygon {
    pub tag: PolygonTag,
    pub indices: Vec<usize>,
}

/// Integer-micrometre point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn from_mm(x: f64, y: f64) -> Self {
        Self::new(mm_to_um(x), mm_to_um(y))
    }

    pub fn x_mm(&self) -> f64 {
        self.x as f64 / UM_PER_MM
    }

    pub fn y_mm(&self) -> f64 {
        self.y as f64 / UM_PER_MM
    }
}

pub fn mm_to_um(v: f64) -> i64 {
    (v * UM_PER_MM).round() as i64
}

/// One vertex move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexAction {
    pub vertex: usize,
    pub direction: Direction,
    /// Displacement in micrometres, always positive.
    pub magnitude_um: i64,
}

impl VertexAction {
    pub fn new(vertex: usize, direction: Direction, magnitude_mm: f64) -> Result<Self, MeshError> {
        let m = mm_to_um(magnitude_mm);
        if m <= 0 || !magnitude_mm.is_finite() {
            return Err(MeshError::BadMagnitude(magnitude_mm));
        }
        Ok(Self {
            vertex,
            direction,
            magnitude_um: m,
        })
    }

    pub fn magnitude_mm(&self) -> f64 {
        self.magnitude_um as f64 / UM_PER_MM
    }

    pub fn inverse(&self) -> Self {
        Self {
            direction: self.direction.opposite(),
            ..*self
        }
    }
}

/// A geometric invariant broken by a mesh.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    IndexOutOfRange { polygon: usize, index: usize },
    DegeneratePolygon { polygon: usize },
    SelfIntersection { polygon: usize, edge_a: usize, edge_b: usize },
    GeometryCollision { polygon_a: usize, polygon_b: usize },
    BoundViolation { vertex: usize },
    MovableLength { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IndexOutOfRange { polygon, index } => {
                write!(f, "index {index} out of range in polygon {polygon}")
            }
            Violation::DegeneratePolygon { polygon } => write!(f, "degenerate polygon {polygon}"),
            Violation::SelfIntersection {
                polygon,
                edge_a,
                edge_b,
            } => write!(f, "self-intersection in polygon {polygon} between edges {edge_a} and {edge_b}"),
            Violation::GeometryCollision { polygon_a, polygon_b } => {
                write!(f, "geometry collision between polygons {polygon_a} and {polygon_b}")
            }
            Violation::BoundViolation { vertex } => write!(f, "bound violation at vertex {vertex}"),
            Violation::MovableLength { expected, found } => {
                write!(f, "movable list has {found} entries, expected {expected}")
            }
        }
    }
}

/// Polygonal planar circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshModel {
    vertices: Vec<Point>,
    polygons: Vec<Polygon>,
    movable: Vec<bool>,
    /// `(Lmax, Wmax)` in micrometres; vertices must lie in `[0, Lmax] x [0, Wmax]`.
    bound: Option<(i64, i64)>,
}

/// On-disk JSON layout, millimetres.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    vertices: Vec<[f64; 2]>,
    polygons: Vec<Polygon>,
    movable: Vec<bool>,
    bound: Option<[f64; 2]>,
}

impl MeshModel {
    /// Builds a mesh without validating it; see [`MeshModel::validated`].
    pub fn new(
        vertices: Vec<Point>,
        polygons: Vec<Polygon>,
        movable: Vec<bool>,
        bound_mm: Option<(f64, f64)>,
    ) -> Self {
        Self {
            vertices,
            polygons,
            movable,
            bound: bound_mm.map(|(l, w)| (mm_to_um(l), mm_to_um(w))),
        }
    }

    pub fn validated(self) -> Result<Self, MeshError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(MeshError::Invalid(v))
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn movable(&self) -> &[bool] {
        &self.movable
    }

    pub fn bound_mm(&self) -> Option<(f64, f64)> {
        self.bound
            .map(|(l, w)| (l as f64 / UM_PER_MM, w as f64 / UM_PER_MM))
    }

    pub fn set_bound_mm(&mut self, bound: Option<(f64, f64)>) {
        self.bound = bound.map(|(l, w)| (mm_to_um(l), mm_to_um(w)));
    }

    pub fn movable_count(&self) -> usize {
        self.movable.iter().filter(|m| **m).count()
    }

    /// Vertices of one polygon in order.
    pub fn polygon_points(&self, polygon: usize) -> Vec<Point> {
        self.polygons[polygon]
            .indices
            .iter()
            .map(|&i| self.vertices[i])
            .collect()
    }

    pub fn polygons_with_tag(&self, tag: PolygonTag) -> Vec<usize> {
        self.polygons
            .iter()
            .enumerate()
            .filter(|(_, p)| p.tag == tag)
            .map(|(i, _)| i)
            .collect()
    }

    /// Axis-aligned bounding box `(xmin, ymin, xmax, ymax)` in micrometres over
    /// all vertices.
    pub fn bbox_um(&self) -> Option<(i64, i64, i64, i64)> {
        let first = self.vertices.first()?;
        Some(self.vertices.iter().fold(
            (first.x, first.y, first.x, first.y),
            |(x0, y0, x1, y1), p| (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y)),
        ))
    }

    /// Every invariant violation, empty when the mesh is valid.
    pub fn validate(&self) -> Vec<Violation> {
        geometry::validate(self)
    }

    /// Returns the displaced mesh, or the violations the move would cause.
    pub fn apply_action(&self, action: &VertexAction) -> Result<MeshModel, MeshError> {
        self.apply_actions(std::slice::from_ref(action))
    }

    /// Applies all moves, then validates the result once.
    pub fn apply_actions(&self, actions: &[VertexAction]) -> Result<MeshModel, MeshError> {
        let mut next = self.clone();
        for a in actions {
            if a.vertex >= self.vertices.len() {
                return Err(MeshError::VertexOutOfRange(a.vertex));
            }
            if !self.movable[a.vertex] {
                return Err(MeshError::NotMovable(a.vertex));
            }
            if a.magnitude_um <= 0 {
                return Err(MeshError::BadMagnitude(a.magnitude_mm()));
            }
            let (dx, dy) = a.direction.unit();
            let p = &mut next.vertices[a.vertex];
            p.x += dx * a.magnitude_um;
            p.y += dy * a.magnitude_um;
        }
        let violations = next.validate();
        if violations.is_empty() {
            Ok(next)
        } else {
            Err(MeshError::Rejected(violations))
        }
    }

    /// Every `(vertex, direction)` pair for movable vertices, vertex-major,
    /// directions in up/down/left/right order.
    pub fn vertex_action_space(&self) -> Vec<(usize, Direction)> {
        self.movable
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .flat_map(|(v, _)| Direction::ALL.iter().map(move |d| (v, *d)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let file = MeshFile {
            vertices: self.vertices.iter().map(|p| [p.x_mm(), p.y_mm()]).collect(),
            polygons: self.polygons.clone(),
            movable: self.movable.clone(),
            bound: self.bound_mm().map(|(l, w)| [l, w]),
        };
        serde_json::to_string_pretty(&file).expect("mesh serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MeshError> {
        let file: MeshFile = serde_json::from_str(text).map_err(|e| MeshError::Json(e.to_string()))?;
        Ok(Self::new(
            file.vertices.iter().map(|v| Point::from_mm(v[0], v[1])).collect(),
            file.polygons,
            file.movable,
            file.bound.map(|b| (b[0], b[1])),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
        vec![
            Point::from_mm(x0, y0),
            Point::from_mm(x1, y0),
            Point::from_mm(x1, y1),
            Point::from_mm(x0, y1),
        ]
    }

    /// Two 0.5 x 3 mm resonators 0.2 mm apart; vertex 0 is a fixed port.
    fn pair() -> MeshModel {
        let mut v = rect(0.0, 0.0, 0.5, 3.0);
        v.extend(rect(0.7, 0.0, 1.2, 3.0));
        let mut movable = vec![true; 8];
        movable[0] = false;
        MeshModel::new(
            v,
            vec![
                Polygon {
                    tag: PolygonTag::Resonator1,
                    indices: vec![0, 1, 2, 3],
                },
                Polygon {
                    tag: PolygonTag::Resonator2,
                    indices: vec![4, 5, 6, 7],
                },
            ],
            movable,
            None,
        )
    }

    #[test]
    fn inverse_actions_restore_mesh() {
        let m = pair();
        let up = VertexAction::new(2, Direction::Up, 0.05).unwrap();
        let moved = m.apply_action(&up).unwrap();
        assert_ne!(moved, m);
        assert_eq!(moved.apply_action(&up.inverse()).unwrap(), m);
    }

    #[test]
    fn fixed_vertex_rejected() {
        let m = pair();
        let a = VertexAction::new(0, Direction::Left, 0.1).unwrap();
        assert_eq!(m.apply_action(&a), Err(MeshError::NotMovable(0)));
    }

    #[test]
    fn closing_the_gap_is_a_collision() {
        let m = pair();
        // push both right-hand corners of resonator 1 into resonator 2
        let acts = [
            VertexAction::new(1, Direction::Right, 0.3).unwrap(),
            VertexAction::new(2, Direction::Right, 0.3).unwrap(),
        ];
        match m.apply_actions(&acts) {
            Err(MeshError::Rejected(v)) => assert!(v
                .iter()
                .any(|x| matches!(x, Violation::GeometryCollision { .. }))),
            other => panic!("unexpected {other:?}"),
        }
        assert!(m.to_string_for_tests().contains("resonator"));
    }

    #[test]
    fn action_space_order_and_size() {
        let m = pair();
        let s = m.vertex_action_space();
        assert_eq!(s.len(), 7 * 4);
        assert_eq!(
            &s[..4],
            &[
                (1, Direction::Up),
                (1, Direction::Down),
                (1, Direction::Left),
                (1, Direction::Right)
            ]
        );
        let frozen = MeshModel::new(m.vertices.clone(), m.polygons.clone(), vec![false; 8], None);
        assert!(frozen.vertex_action_space().is_empty());
    }

    #[test]
    fn five_hundred_vertices_give_two_thousand_actions() {
        let vertices: Vec<Point> = (0..500).map(|i| Point::new(i, 0)).collect();
        let m = MeshModel::new(vertices, vec![], vec![true; 500], None);
        assert_eq!(m.vertex_action_space().len(), 2000);
    }

    #[test]
    fn json_roundtrip() {
        let mut m = pair();
        m.set_bound_mm(Some((5.0, 5.0)));
        let back = MeshModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(MeshModel::from_json(r#"{"vertices":[],"polygons":[],"movable":[],"bound":null,"x":1}"#).is_err());
    }

    #[test]
    fn apply_is_pure() {
        let m = pair();
        let a = VertexAction::new(5, Direction::Down, 0.15).unwrap();
        let r1 = m.apply_action(&a).unwrap();
        let r2 = m.apply_action(&a).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(m, pair());
    }

    impl MeshModel {
        fn to_string_for_tests(&self) -> String {
            self.to_json()
        }
    }
}
