use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_freqs, SurrogateError, C0, ETA0};
use crate::sparams::{abcd_cascade, abcd_to_s, Abcd, SParamPoint, SParamSweep};

/// Characteristic impedance and effective permittivity of a microstrip of
/// width `w_mm` on a substrate of height `h_mm`, zero-thickness strip,
/// Hammerstad-Jensen closed forms.
pub fn microstrip_params(w_mm: f64, h_mm: f64, er: f64) -> Result<(f64, f64), SurrogateError> {
    if !(w_mm > 0.0 && h_mm > 0.0) || !(er >= 1.0) || !w_mm.is_finite() || !h_mm.is_finite() {
        return Err(SurrogateError::InvalidParam(format!(
            "microstrip W={w_mm} h={h_mm} er={er}"
        )));
    }
    let u = w_mm / h_mm;
    let a = 1.0
        + ((u.powi(4) + (u / 52.0).powi(2)) / (u.powi(4) + 0.432)).ln() / 49.0
        + (1.0 + (u / 18.1).powi(3)).ln() / 18.7;
    let b = 0.564 * ((er - 0.9) / (er + 3.0)).powf(0.053);
    let e_eff = (er + 1.0) / 2.0 + (er - 1.0) / 2.0 * (1.0 + 10.0 / u).powf(-a * b);
    let fu = 6.0 + (2.0 * PI - 6.0) * (-(30.666 / u).powf(0.7528)).exp();
    let z01 = ETA0 / (2.0 * PI) * (fu / u + (1.0 + (2.0 / u).powi(2)).sqrt()).ln();
    Ok((z01 / e_eff.sqrt(), e_eff))
}

/// One uniform section of a stepped line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrostripSegment {
    pub width_mm: f64,
    pub length_mm: f64,
    pub h_mm: f64,
    pub er: f64,
}

/// Cascade of lossless line sections converted to S at `z_ref`.
pub fn tl_sweep(
    segments: &[MicrostripSegment],
    freqs: &[f64],
    z_ref: f64,
) -> Result<SParamSweep, SurrogateError> {
    check_freqs(freqs)?;
    if segments.is_empty() {
        return Err(SurrogateError::InvalidParam("no line segments".into()));
    }
    let mut lines = Vec::with_capacity(segments.len());
    for s in segments {
        if !(s.length_mm >= 0.0) {
            return Err(SurrogateError::InvalidParam(format!("segment length {}", s.length_mm)));
        }
        let (z0, e_eff) = microstrip_params(s.width_mm, s.h_mm, s.er)?;
        lines.push((z0, e_eff.sqrt() * s.length_mm * 1e-3));
    }
    let mut points = Vec::with_capacity(freqs.len());
    for &f in freqs {
        let blocks: Vec<Abcd> = lines
            .iter()
            .map(|&(z0, el)| Abcd::lossless_line(z0, 2.0 * PI * f * el / C0))
            .collect();
        // det = 1 holds only to rounding, so s12 is copied from s21
        let (s11, _, s21, s22) = abcd_to_s(&abcd_cascade(&blocks)?, z_ref)?;
        points.push(SParamPoint::reciprocal(f, s11, s21, s22));
    }
    Ok(SParamSweep::new(points, z_ref)?)
}
