//! Two-port network math: ABCD cascades, ABCD to S conversion, dB
//! magnitudes and Touchstone/CSV interchange.

mod abcd;
mod touchstone;

pub use abcd::{abcd_cascade, abcd_to_s, Abcd};
pub use touchstone::{read_touchstone, write_csv, write_touchstone};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default reference impedance in ohms.
pub const Z_REF_DEFAULT: f64 = 50.0;

/// Magnitude assigned to an exact zero by [`db_mag`].
pub const DB_FLOOR: f64 = -200.0;

#[derive(Debug, Error, PartialEq)]
pub enum SParamError {
    #[error("empty cascade")]
    EmptyCascade,
    #[error("degenerate network")]
    DegenerateNetwork,
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SParamError {
    fn from(e: std::io::Error) -> Self {
        SParamError::Io(e.to_string())
    }
}

/// S-parameters of a two-port at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SParamPoint {
    pub frequency: f64,
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
}

impl SParamPoint {
    /// Builds a reciprocal point; `s12` is a copy of `s21`.
    pub fn reciprocal(frequency: f64, s11: Complex64, s21: Complex64, s22: Complex64) -> Self {
        Self {
            frequency,
            s11,
            s12: s21,
            s21,
            s22,
        }
    }

    /// One-port response stored in two-port form (transmission fixed at zero).
    pub fn one_port(frequency: f64, s11: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            frequency,
            s11,
            s12: zero,
            s21: zero,
            s22: zero,
        }
    }
}

/// A frequency sweep of two-port S-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SParamSweep {
    points: Vec<SParamPoint>,
    z_ref: f64,
}

impl SParamSweep {
    /// Validates ordering and length; at least two strictly increasing
    /// frequencies are required.
    pub fn new(points: Vec<SParamPoint>, z_ref: f64) -> Result<Self, SParamError> {
        if points.len() < 2 {
            return Err(SParamError::InvalidSweep(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if !(z_ref > 0.0) || !z_ref.is_finite() {
            return Err(SParamError::InvalidSweep(format!("reference impedance {z_ref}")));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[1].frequency > w[0].frequency) {
                return Err(SParamError::InvalidSweep(format!(
                    "frequencies not strictly increasing at index {}",
                    i + 1
                )));
            }
        }
        Ok(Self { points, z_ref })
    }

    pub fn points(&self) -> &[SParamPoint] {
        &self.points
    }

    pub fn z_ref(&self) -> f64 {
        self.z_ref
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.frequency).collect()
    }

    pub fn s11_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| db_mag(p.s11)).collect()
    }

    pub fn s21_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| db_mag(p.s21)).collect()
    }
}

/// `20 log10 |x|`, with an exact zero mapped to [`DB_FLOOR`].
pub fn db_mag(x: Complex64) -> f64 {
    db_mag_with_floor(x, DB_FLOOR)
}

pub fn db_mag_with_floor(x: Complex64, floor: f64) -> f64 {
    let m = x.norm();
    if m == 0.0 {
        floor
    } else {
        (20.0 * m.log10()).max(floor)
    }
}

/// `n` evenly spaced frequencies spanning `[lo, hi]` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// 101 points over `[0.5 f0, 1.5 f0]`.
pub fn default_grid(f0: f64) -> Vec<f64> {
    linear_grid(0.5 * f0, 1.5 * f0, 101)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn db_mag_reference_values() {
        assert_eq!(db_mag(c(1.0, 0.0)), 0.0);
        assert!((db_mag(c(0.1, 0.0)) + 20.0).abs() < 1e-12);
        assert_eq!(db_mag(c(0.0, 0.0)), -200.0);
        assert_eq!(db_mag_with_floor(c(0.0, 0.0), -120.0), -120.0);
    }

    #[test]
    fn sweep_rejects_bad_frequency_order() {
        let p = |f| SParamPoint::reciprocal(f, c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert!(SParamSweep::new(vec![p(1.0)], 50.0).is_err());
        assert!(SParamSweep::new(vec![p(2.0), p(1.0)], 50.0).is_err());
        assert!(SParamSweep::new(vec![p(1.0), p(1.0)], 50.0).is_err());
        assert!(SParamSweep::new(vec![p(1.0), p(2.0)], 50.0).is_ok());
    }

    #[test]
    fn default_grid_hits_center() {
        let g = default_grid(9.3e9);
        assert_eq!(g.len(), 101);
        assert!((g[50] - 9.3e9).abs() < 1.0);
        assert_eq!(g[100], 1.5 * 9.3e9);
    }

    proptest::proptest! {
        #[test]
        fn db_mag_monotone(a in 1e-12f64..1e3, b in 1e-12f64..1e3) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            proptest::prop_assert!(db_mag(c(lo, 0.0)) <= db_mag(c(0.0, hi)));
        }
    }
}
