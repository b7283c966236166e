//! Exact integer predicates for polygon validity.

use super::{MeshModel, Point, Violation};

fn orient(a: Point, b: Point, c: Point) -> i128 {
    let abx = (b.x - a.x) as i128;
    let aby = (b.y - a.y) as i128;
    let acx = (c.x - a.x) as i128;
    let acy = (c.y - a.y) as i128;
    abx * acy - aby * acx
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    orient(a, b, p) == 0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection, touching included.
fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c).signum();
    let o2 = orient(a, b, d).signum();
    let o3 = orient(c, d, a).signum();
    let o4 = orient(c, d, b).signum();
    if o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
        return true;
    }
    on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b)
}

/// Interiors cross at a single point (no endpoint contact, no collinearity).
fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c).signum();
    let o2 = orient(a, b, d).signum();
    let o3 = orient(c, d, a).signum();
    let o4 = orient(c, d, b).signum();
    o1 * o2 < 0 && o3 * o4 < 0
}

/// Twice the signed area.
fn area2(pts: &[Point]) -> i128 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            p.x as i128 * q.y as i128 - q.x as i128 * p.y as i128
        })
        .sum()
}

/// Absolute polygon area in square micrometres.
pub fn polygon_area_um2(pts: &[Point]) -> f64 {
    (area2(pts).abs() as f64) / 2.0
}

/// Even-odd test on real coordinates; points exactly on an edge may land on
/// either side.
pub fn point_in_polygon(px: f64, py: f64, poly: &[(f64, f64)]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > py) != (yj > py) {
            let x_cross = xi + (py - yi) * (xj - xi) / (yj - yi);
            if px < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn polygon_self_intersections(pid: usize, pts: &[Point], out: &mut Vec<Violation>) {
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in (i + 1)..n {
            let (c, d) = (pts[j], pts[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let bad = if adjacent {
                // Shared endpoint is fine; folding back over the neighbour is not.
                let (shared, other_a, other_b) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                orient(other_a, shared, other_b) == 0
                    && ((other_a.x - shared.x) * (other_b.x - shared.x)
                        + (other_a.y - shared.y) * (other_b.y - shared.y))
                        > 0
            } else {
                segments_touch(a, b, c, d)
            };
            if bad {
                out.push(Violation::SelfIntersection {
                    polygon: pid,
                    edge_a: i,
                    edge_b: j,
                });
            }
        }
    }
}

fn polygons_overlap(a: &[Point], b: &[Point]) -> bool {
    let (na, nb) = (a.len(), b.len());
    for i in 0..na {
        let (p, q) = (a[i], a[(i + 1) % na]);
        for j in 0..nb {
            if segments_cross(p, q, b[j], b[(j + 1) % nb]) {
                return true;
            }
        }
    }
    // With no proper crossings, edges cannot cross inside a vertical slab
    // between consecutive vertex abscissae, so one probe line per slab
    // decides whether the interiors share positive area.
    let mut xs: Vec<i64> = a.iter().chain(b.iter()).map(|p| p.x).collect();
    xs.sort_unstable();
    xs.dedup();
    xs.windows(2).any(|w| {
        let x = (w[0] as f64 + w[1] as f64) / 2.0;
        let (ia, ib) = (interior_intervals(a, x), interior_intervals(b, x));
        ia.iter()
            .any(|&(lo, hi)| ib.iter().any(|&(l2, h2)| hi.min(h2) > lo.max(l2)))
    })
}

/// Intervals of the vertical line at `x` that lie inside the polygon.
fn interior_intervals(poly: &[Point], x: f64) -> Vec<(f64, f64)> {
    let n = poly.len();
    let mut ys: Vec<f64> = (0..n)
        .filter_map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            let (px, qx) = (p.x as f64, q.x as f64);
            if (px < x) != (qx < x) {
                Some(p.y as f64 + (x - px) * (q.y - p.y) as f64 / (qx - px))
            } else {
                None
            }
        })
        .collect();
    ys.sort_by(f64::total_cmp);
    ys.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

pub(super) fn validate(mesh: &MeshModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let nv = mesh.vertices.len();
    if mesh.movable.len() != nv {
        out.push(Violation::MovableLength {
            expected: nv,
            found: mesh.movable.len(),
        });
    }
    let mut shapes: Vec<Option<Vec<Point>>> = Vec::with_capacity(mesh.polygons.len());
    for (pid, poly) in mesh.polygons.iter().enumerate() {
        if let Some(&bad) = poly.indices.iter().find(|&&i| i >= nv) {
            out.push(Violation::IndexOutOfRange {
                polygon: pid,
                index: bad,
            });
            shapes.push(None);
            continue;
        }
        let pts: Vec<Point> = poly.indices.iter().map(|&i| mesh.vertices[i]).collect();
        if pts.len() < 3 || pts.iter().all(|p| orient(pts[0], pts[1], *p) == 0) {
            out.push(Violation::DegeneratePolygon { polygon: pid });
            shapes.push(None);
            continue;
        }
        polygon_self_intersections(pid, &pts, &mut out);
        shapes.push(Some(pts));
    }
    for i in 0..shapes.len() {
        for j in (i + 1)..shapes.len() {
            if mesh.polygons[i].tag == mesh.polygons[j].tag {
                continue;
            }
            if let (Some(a), Some(b)) = (&shapes[i], &shapes[j]) {
                if polygons_overlap(a, b) {
                    out.push(Violation::GeometryCollision {
                        polygon_a: i,
                        polygon_b: j,
                    });
                }
            }
        }
    }
    if let Some((lx, ly)) = mesh.bound {
        for (i, p) in mesh.vertices.iter().enumerate() {
            if p.x < 0 || p.y < 0 || p.x > lx || p.y > ly {
                out.push(Violation::BoundViolation { vertex: i });
            }
        }
    }
    out
}
