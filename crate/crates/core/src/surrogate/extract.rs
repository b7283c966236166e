//! Geometric parameter maps from tagged meshes to circuit parameters.
//!
//! Extents along an axis are measured between end groups: the vertices
//! within `end_group_fraction` of the extent from each extreme are averaged.
//! Moving a single corner therefore changes a length by a fraction of the
//! move, which keeps every map continuous in the vertex positions.

use super::{
    microstrip_params, CoupledResonatorParams, Material, MicrostripSegment, PatchParams,
    SurrogateError, C0,
};
use crate::mesh::{MeshModel, Point, PolygonTag};

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

fn coord(p: &Point, axis: Axis) -> f64 {
    match axis {
        Axis::X => p.x_mm(),
        Axis::Y => p.y_mm(),
    }
}

/// `(low end mean, high end mean)` along `axis`.
fn end_means(pts: &[Point], axis: Axis, fraction: f64) -> (f64, f64) {
    let v: Vec<f64> = pts.iter().map(|p| coord(p, axis)).collect();
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = fraction * (hi - lo);
    let mean = |sel: &dyn Fn(f64) -> bool| {
        let g: Vec<f64> = v.iter().copied().filter(|x| sel(*x)).collect();
        g.iter().sum::<f64>() / g.len() as f64
    };
    (mean(&|x| x <= lo + tol), mean(&|x| x >= hi - tol))
}

fn extent(pts: &[Point], axis: Axis, fraction: f64) -> f64 {
    let (lo, hi) = end_means(pts, axis, fraction);
    hi - lo
}

fn centre(pts: &[Point], axis: Axis, fraction: f64) -> f64 {
    let (lo, hi) = end_means(pts, axis, fraction);
    (lo + hi) / 2.0
}

/// x coordinates where the horizontal line at `y` crosses the polygon
/// boundary, half-open in y so that vertices count once.
pub fn polygon_crossings(pts: &[Point], y: f64) -> Vec<f64> {
    let n = pts.len();
    (0..n)
        .filter_map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let (ax, ay, bx, by) = (a.x_mm(), a.y_mm(), b.x_mm(), b.y_mm());
            if (ay <= y && y < by) || (by <= y && y < ay) {
                Some(ax + (y - ay) * (bx - ax) / (by - ay))
            } else {
                None
            }
        })
        .collect()
}

fn single(mesh: &MeshModel, tag: PolygonTag, name: &str) -> Result<Vec<Point>, SurrogateError> {
    match mesh.polygons_with_tag(tag).as_slice() {
        [p] => Ok(mesh.polygon_points(*p)),
        other => Err(SurrogateError::MeshShape(format!(
            "expected exactly one {name} polygon, found {}",
            other.len()
        ))),
    }
}

/// Mean separation between the facing edges of two side-by-side shapes,
/// sampled over their common y range.
fn mean_gap(left: &[Point], right: &[Point], samples: usize) -> Result<f64, SurrogateError> {
    let span = |p: &[Point]| {
        p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
            (lo.min(q.y_mm()), hi.max(q.y_mm()))
        })
    };
    let (l0, l1) = span(left);
    let (r0, r1) = span(right);
    let (lo, hi) = (l0.max(r0), l1.min(r1));
    if !(hi > lo) {
        return Err(SurrogateError::MeshShape("resonators do not face each other".into()));
    }
    let mut total = 0.0;
    for k in 0..samples {
        let y = lo + (hi - lo) * (k as f64 + 0.5) / samples as f64;
        let a = polygon_crossings(left, y).into_iter().fold(f64::NEG_INFINITY, f64::max);
        let b = polygon_crossings(right, y).into_iter().fold(f64::INFINITY, f64::min);
        if !(b - a > 0.0) {
            return Err(SurrogateError::GeometryCollision);
        }
        total += b - a;
    }
    Ok(total / samples as f64)
}

/// Resonator lengths set the resonant frequencies, the gap sets the
/// inter-resonator coupling and the tap position of each feed relative to
/// the resonator centre sets the external coupling.
pub fn extract_filter_params(
    mesh: &MeshModel,
    material: &Material,
) -> Result<CoupledResonatorParams, SurrogateError> {
    let frac = material.end_group_fraction;
    let r1 = single(mesh, PolygonTag::Resonator1, "resonator-1")?;
    let r2 = single(mesh, PolygonTag::Resonator2, "resonator-2")?;
    let (_, e_eff) = microstrip_params(material.resonator_width_mm, material.h_mm, material.er)?;
    let freq = |pts: &[Point]| {
        let l = extent(pts, Axis::Y, frac);
        if l > 0.0 {
            Ok(C0 / (2.0 * l * 1e-3 * e_eff.sqrt()))
        } else {
            Err(SurrogateError::MeshShape("resonator has no length".into()))
        }
    };
    let (f1, f2) = (freq(&r1)?, freq(&r2)?);
    let gap = if centre(&r1, Axis::X, frac) <= centre(&r2, Axis::X, frac) {
        mean_gap(&r1, &r2, material.gap_samples)?
    } else {
        mean_gap(&r2, &r1, material.gap_samples)?
    };
    let m1 = material.k0 * (-gap / material.g0_mm).exp();

    let feeds: Vec<Vec<Point>> = mesh
        .polygons_with_tag(PolygonTag::Feed)
        .into_iter()
        .map(|p| mesh.polygon_points(p))
        .collect();
    if feeds.len() != 2 {
        return Err(SurrogateError::MeshShape(format!(
            "expected two feed polygons, found {}",
            feeds.len()
        )));
    }
    let (c1x, c2x) = (centre(&r1, Axis::X, frac), centre(&r2, Axis::X, frac));
    let (fa, fb) = (centre(&feeds[0], Axis::X, frac), centre(&feeds[1], Axis::X, frac));
    let (feed1, feed2) = if (fa - c1x).abs() + (fb - c2x).abs() <= (fa - c2x).abs() + (fb - c1x).abs() {
        (&feeds[0], &feeds[1])
    } else {
        (&feeds[1], &feeds[0])
    };
    let tap = |feed: &[Point], res: &[Point]| {
        let offset = (centre(feed, Axis::Y, frac) - centre(res, Axis::Y, frac)).abs();
        material.tap_base + material.tap_slope_per_mm * offset
    };
    let f0 = (f1 * f2).sqrt();
    Ok(CoupledResonatorParams {
        f1,
        f2,
        m0: tap(feed1, &r1),
        m1,
        m2: tap(feed2, &r2),
        bw: 0.1 * f0,
        f0,
    })
}

/// Sections ordered by x; length along x, width along y.
pub fn extract_line_segments(
    mesh: &MeshModel,
    material: &Material,
) -> Result<Vec<MicrostripSegment>, SurrogateError> {
    let frac = material.end_group_fraction;
    let mut segs: Vec<(f64, MicrostripSegment)> = mesh
        .polygons_with_tag(PolygonTag::LineSegment)
        .into_iter()
        .map(|p| {
            let pts = mesh.polygon_points(p);
            (
                centre(&pts, Axis::X, frac),
                MicrostripSegment {
                    width_mm: extent(&pts, Axis::Y, frac),
                    length_mm: extent(&pts, Axis::X, frac),
                    h_mm: material.h_mm,
                    er: material.er,
                },
            )
        })
        .collect();
    if segs.is_empty() {
        return Err(SurrogateError::MeshShape("no line-segment polygons".into()));
    }
    segs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(segs.into_iter().map(|(_, s)| s).collect())
}

/// Patch length along y, width along x; the feed is a horizontal strip
/// whose centre height above the patch's lower edge is the tap offset.
pub fn extract_patch_params(mesh: &MeshModel, material: &Material) -> Result<PatchParams, SurrogateError> {
    let frac = material.end_group_fraction;
    let patch = single(mesh, PolygonTag::Patch, "patch")?;
    let feed = single(mesh, PolygonTag::Feed, "feed")?;
    let (bottom, _) = end_means(&patch, Axis::Y, frac);
    let offset = centre(&feed, Axis::Y, frac) - bottom;
    if offset < 0.0 {
        return Err(SurrogateError::MeshShape("feed below the patch".into()));
    }
    Ok(PatchParams {
        length_mm: extent(&patch, Axis::Y, frac),
        width_mm: extent(&patch, Axis::X, frac),
        h_mm: material.h_mm,
        er: material.er,
        feed_width_mm: extent(&feed, Axis::Y, frac),
        feed_length_mm: extent(&feed, Axis::X, frac),
        feed_offset_mm: offset,
    })
}
