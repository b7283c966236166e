use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_freqs, SurrogateError};
use crate::sparams::{SParamPoint, SParamSweep, Z_REF_DEFAULT};

/// Two coupled resonators between a source and a load.
///
/// Couplings are physical (fractional) coefficients. The normalized matrix
/// uses `m = M1 / FBW` and `R = M0^2 / FBW` with `FBW = bw / f0`, which makes
/// the response independent of the bandwidth used for normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledResonatorParams {
    pub f1: f64,
    pub f2: f64,
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub bw: f64,
    pub f0: f64,
}

impl CoupledResonatorParams {
    fn check(&self) -> Result<(), SurrogateError> {
        let pos = [self.f1, self.f2, self.f0, self.bw];
        let nonneg = [self.m0, self.m1, self.m2];
        if pos.iter().all(|v| *v > 0.0 && v.is_finite()) && nonneg.iter().all(|v| *v >= 0.0 && v.is_finite())
        {
            Ok(())
        } else {
            Err(SurrogateError::InvalidParam(format!("{self:?}")))
        }
    }
}

/// Coupling-matrix response of the two-resonator network.
pub fn filter_sweep(p: &CoupledResonatorParams, freqs: &[f64]) -> Result<SParamSweep, SurrogateError> {
    p.check()?;
    check_freqs(freqs)?;
    let fbw = p.bw / p.f0;
    let lam = |f: f64| (p.f0 / p.bw) * (f / p.f0 - p.f0 / f);
    let r1 = p.m0 * p.m0 / fbw;
    let r2 = p.m2 * p.m2 / fbw;
    let m = Complex64::new(p.m1 / fbw, 0.0);
    let (d1, d2) = (lam(p.f1), lam(p.f2));
    let j = Complex64::i();
    let mut points = Vec::with_capacity(freqs.len());
    for &f in freqs {
        let l = lam(f);
        let a11 = Complex64::new(l - d1, -r1);
        let a22 = Complex64::new(l - d2, -r2);
        let det = a11 * a22 - m * m;
        if det.norm() < 1e-300 || !det.is_finite() {
            return Err(SurrogateError::Singular { frequency: f });
        }
        // explicit 2x2 inverse
        let inv11 = a22 / det;
        let inv22 = a11 / det;
        let inv21 = -m / det;
        let k = -2.0 * j * (r1 * r2).sqrt();
        let s21 = k * inv21;
        let s11 = 1.0 + 2.0 * j * r1 * inv11;
        let s22 = 1.0 + 2.0 * j * r2 * inv22;
        points.push(SParamPoint::reciprocal(f, s11, s21, s22));
    }
    Ok(SParamSweep::new(points, Z_REF_DEFAULT)?)
}
