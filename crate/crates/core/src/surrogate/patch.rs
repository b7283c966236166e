use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_freqs, microstrip_params, SurrogateError, C0};
use crate::sparams::{SParamPoint, SParamSweep};

/// Rectangular patch fed by a microstrip that taps the resonant length.
///
/// `feed_offset_mm` is the tap position measured along the effective
/// resonant length `L + 2 dL` from its lower end; zero is an edge feed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchParams {
    pub length_mm: f64,
    pub width_mm: f64,
    pub h_mm: f64,
    pub er: f64,
    pub feed_width_mm: f64,
    pub feed_length_mm: f64,
    pub feed_offset_mm: f64,
}

impl PatchParams {
    fn check(&self) -> Result<(), SurrogateError> {
        let pos = [self.length_mm, self.width_mm, self.h_mm, self.feed_width_mm];
        if pos.iter().all(|v| *v > 0.0 && v.is_finite())
            && self.er >= 1.0
            && self.feed_length_mm >= 0.0
            && self.feed_offset_mm >= 0.0
        {
            Ok(())
        } else {
            Err(SurrogateError::InvalidParam(format!("{self:?}")))
        }
    }

    /// Effective permittivity of the patch as a wide microstrip.
    pub fn e_eff(&self) -> Result<f64, SurrogateError> {
        Ok(microstrip_params(self.width_mm, self.h_mm, self.er)?.1)
    }

    /// Fringing length extension at each radiating edge, mm.
    pub fn delta_l_mm(&self) -> Result<f64, SurrogateError> {
        let e = self.e_eff()?;
        let u = self.width_mm / self.h_mm;
        Ok(0.412 * self.h_mm * (e + 0.3) * (u + 0.264) / ((e - 0.258) * (u + 0.8)))
    }

    /// `c / (2 (L + 2 dL) sqrt(e_eff))`, Hz.
    pub fn resonant_frequency(&self) -> Result<f64, SurrogateError> {
        let le = (self.length_mm + 2.0 * self.delta_l_mm()?) * 1e-3;
        Ok(C0 / (2.0 * le * self.e_eff()?.sqrt()))
    }

    /// Radiating-slot conductance at frequency `f`, siemens.
    pub fn slot_conductance(&self, f: f64) -> f64 {
        let lam0 = C0 / f;
        let k0h = 2.0 * PI / lam0 * self.h_mm * 1e-3;
        self.width_mm * 1e-3 / (120.0 * lam0) * (1.0 - k0h * k0h / 24.0)
    }
}

/// Input admittance of a resonant line of characteristic admittance `y0`,
/// phase constant `beta` and length `le`, loaded by conductance `g` at both
/// ends and tapped at distance `d` from one end.
pub fn patch_input_admittance(y0: f64, beta: f64, le: f64, d: f64, g: f64) -> Complex64 {
    let j = Complex64::i();
    let load = |x: f64| {
        let t = (beta * x).tan();
        y0 * (g + j * y0 * t) / (y0 + j * g * t)
    };
    load(d) + load(le - d)
}

/// One-port response referred to `z_ref` at the feed-line input.
pub fn patch_sweep(p: &PatchParams, freqs: &[f64], z_ref: f64) -> Result<SParamSweep, SurrogateError> {
    p.check()?;
    check_freqs(freqs)?;
    let (z_patch, e_eff) = microstrip_params(p.width_mm, p.h_mm, p.er)?;
    let le = (p.length_mm + 2.0 * p.delta_l_mm()?) * 1e-3;
    let d = p.feed_offset_mm * 1e-3;
    if d > le {
        return Err(SurrogateError::InvalidParam(format!(
            "feed offset {} mm beyond the resonant length",
            p.feed_offset_mm
        )));
    }
    let (z_feed, e_feed) = microstrip_params(p.feed_width_mm, p.h_mm, p.er)?;
    let j = Complex64::i();
    let mut points = Vec::with_capacity(freqs.len());
    for &f in freqs {
        let beta = 2.0 * PI * f * e_eff.sqrt() / C0;
        let y_in = patch_input_admittance(1.0 / z_patch, beta, le, d, p.slot_conductance(f));
        let zl = 1.0 / y_in;
        let t = (2.0 * PI * f * e_feed.sqrt() * p.feed_length_mm * 1e-3 / C0).tan();
        let zin = z_feed * (zl + j * z_feed * t) / (z_feed + j * zl * t);
        points.push(SParamPoint::one_port(f, (zin - z_ref) / (zin + z_ref)));
    }
    Ok(SParamSweep::new(points, z_ref)?)
}
