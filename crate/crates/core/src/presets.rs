//! Seed geometries for the three circuit families.
//!
//! Shapes are axis-aligned strips subdivided with extra vertices along their
//! long edges so that single-vertex moves act on lengths, gaps and widths
//! with different strengths.

use serde::{Deserialize, Serialize};

use crate::mesh::{MeshModel, Point, Polygon, PolygonTag};

/// Two parallel half-wave resonators tapped by fixed feed stubs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterLayout {
    pub resonator_length_mm: f64,
    pub resonator_width_mm: f64,
    pub gap_mm: f64,
    /// Feed centre height above the resonator centre.
    pub tap_offset_mm: f64,
    pub feed_width_mm: f64,
    pub feed_length_mm: f64,
    /// Intermediate vertices on the gap-facing edge of each resonator.
    pub inner_points: usize,
    /// Intermediate vertices on the outer edge of each resonator.
    pub outer_points: usize,
}

impl Default for FilterLayout {
    fn default() -> Self {
        Self {
            resonator_length_mm: 5.701,
            resonator_width_mm: 0.5,
            gap_mm: 0.251,
            tap_offset_mm: 1.9,
            feed_width_mm: 0.4,
            feed_length_mm: 1.0,
            inner_points: 7,
            outer_points: 9,
        }
    }
}

struct Builder {
    vertices: Vec<Point>,
    movable: Vec<bool>,
    polygons: Vec<Polygon>,
}

impl Builder {
    fn new() -> Self {
        Self {
            vertices: Vec::new(),
            movable: Vec::new(),
            polygons: Vec::new(),
        }
    }

    fn polygon(&mut self, tag: PolygonTag, pts: Vec<((f64, f64), bool)>) {
        let start = self.vertices.len();
        for ((x, y), m) in pts {
            self.vertices.push(Point::from_mm(x, y));
            self.movable.push(m);
        }
        self.polygons.push(Polygon {
            tag,
            indices: (start..self.vertices.len()).collect(),
        });
    }

    fn build(self) -> MeshModel {
        MeshModel::new(self.vertices, self.polygons, self.movable, None)
    }
}

fn between(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |i| a + (b - a) * i as f64 / (n + 1) as f64)
}

/// Counter-clockwise rectangle outline with `right`/`left` intermediate
/// points on the vertical edges and `top`/`bottom` on the horizontal ones.
fn strip(x0: f64, y0: f64, x1: f64, y1: f64, bottom: usize, right: usize, top: usize, left: usize) -> Vec<(f64, f64)> {
    let mut v = vec![(x0, y0)];
    v.extend(between(x0, x1, bottom).map(|x| (x, y0)));
    v.push((x1, y0));
    v.extend(between(y0, y1, right).map(|y| (x1, y)));
    v.push((x1, y1));
    v.extend(between(x1, x0, top).map(|x| (x, y1)));
    v.push((x0, y1));
    v.extend(between(y1, y0, left).map(|y| (x0, y)));
    v
}

/// Resonator vertices are movable, feed stubs are fixed ports.
pub fn filter_mesh(l: &FilterLayout) -> MeshModel {
    let margin = 0.2;
    let w = l.resonator_width_mm;
    let feed_gap = 0.2;
    let (y0, y1) = (margin, margin + l.resonator_length_mm);
    let tap_y = (y0 + y1) / 2.0 + l.tap_offset_mm;
    let (fy0, fy1) = (tap_y - l.feed_width_mm / 2.0, tap_y + l.feed_width_mm / 2.0);
    let r1x = margin + l.feed_length_mm + feed_gap;
    let r2x = r1x + w + l.gap_mm;
    let f2x = r2x + w + feed_gap;

    let mut b = Builder::new();
    let fixed = |pts: Vec<(f64, f64)>| pts.into_iter().map(|p| (p, false)).collect::<Vec<_>>();
    let free = |pts: Vec<(f64, f64)>| pts.into_iter().map(|p| (p, true)).collect::<Vec<_>>();
    b.polygon(
        PolygonTag::Feed,
        fixed(strip(margin, fy0, margin + l.feed_length_mm, fy1, 0, 0, 0, 0)),
    );
    b.polygon(
        PolygonTag::Resonator1,
        free(strip(r1x, y0, r1x + w, y1, 0, l.inner_points, 0, l.outer_points)),
    );
    b.polygon(
        PolygonTag::Resonator2,
        free(strip(r2x, y0, r2x + w, y1, 0, l.outer_points, 0, l.inner_points)),
    );
    b.polygon(
        PolygonTag::Feed,
        fixed(strip(f2x, fy0, f2x + l.feed_length_mm, fy1, 0, 0, 0, 0)),
    );
    b.build()
}

/// Rectangular patch side-fed by a horizontal microstrip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchLayout {
    pub length_mm: f64,
    pub width_mm: f64,
    pub feed_width_mm: f64,
    pub feed_length_mm: f64,
    /// Feed centre height above the patch's lower edge.
    pub feed_offset_mm: f64,
    /// Intermediate vertices on the horizontal (radiating) edges.
    pub edge_points: usize,
    /// Intermediate vertices on the vertical edges.
    pub side_points: usize,
}

impl Default for PatchLayout {
    fn default() -> Self {
        Self {
            length_mm: 5.6,
            width_mm: 6.0,
            feed_width_mm: 0.37,
            feed_length_mm: 2.0,
            feed_offset_mm: 2.32,
            edge_points: 3,
            side_points: 3,
        }
    }
}

/// The feed's port end is fixed; every other vertex is movable.
pub fn patch_mesh(l: &PatchLayout) -> MeshModel {
    let margin = 0.2;
    let px0 = margin + l.feed_length_mm;
    let (py0, py1) = (margin, margin + l.length_mm);
    let fc = py0 + l.feed_offset_mm;
    let (fy0, fy1) = (fc - l.feed_width_mm / 2.0, fc + l.feed_width_mm / 2.0);
    let mut b = Builder::new();
    b.polygon(
        PolygonTag::Patch,
        strip(
            px0,
            py0,
            px0 + l.width_mm,
            py1,
            l.edge_points,
            l.side_points,
            l.edge_points,
            l.side_points,
        )
        .into_iter()
        .map(|p| (p, true))
        .collect(),
    );
    // feed outline: port end at x = margin fixed, patch end movable
    let feed = strip(margin, fy0, px0, fy1, 1, 0, 1, 0);
    b.polygon(
        PolygonTag::Feed,
        feed.into_iter()
            .map(|p| (p, (p.0 - margin).abs() > 1e-9))
            .collect(),
    );
    b.build()
}

/// Stepped line of axis-aligned sections along x; the two port edges are fixed.
pub fn line_mesh(widths_mm: &[f64], lengths_mm: &[f64]) -> MeshModel {
    assert_eq!(widths_mm.len(), lengths_mm.len());
    let height = widths_mm.iter().copied().fold(0.0, f64::max) + 0.4;
    let yc = height / 2.0;
    let mut x = 0.2;
    let n = widths_mm.len();
    let mut b = Builder::new();
    for (i, (&w, &len)) in widths_mm.iter().zip(lengths_mm).enumerate() {
        let pts = strip(x, yc - w / 2.0, x + len, yc + w / 2.0, 1, 0, 1, 0);
        let (lo, hi) = (x, x + len);
        b.polygon(
            PolygonTag::LineSegment,
            pts.into_iter()
                .map(|p| {
                    let port = (i == 0 && (p.0 - lo).abs() < 1e-9) || (i + 1 == n && (p.0 - hi).abs() < 1e-9);
                    (p, !port)
                })
                .collect(),
        );
        x += len;
    }
    b.build()
}
