use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SParamError;

/// Chain (ABCD) parameters of a two-port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new(one, zero, zero, one)
    }

    /// Lossless line section of characteristic impedance `z0` and electrical
    /// length `theta` radians.
    pub fn lossless_line(z0: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(
            Complex64::new(c, 0.0),
            Complex64::new(0.0, z0 * s),
            Complex64::new(0.0, s / z0),
            Complex64::new(c, 0.0),
        )
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `self` followed by `rhs`.
    pub fn then(&self, rhs: &Abcd) -> Abcd {
        Abcd {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

/// Ordered matrix product of the blocks.
pub fn abcd_cascade(blocks: &[Abcd]) -> Result<Abcd, SParamError> {
    let (first, rest) = blocks.split_first().ok_or(SParamError::EmptyCascade)?;
    Ok(rest.iter().fold(*first, |acc, m| acc.then(m)))
}

/// Returns `(s11, s12, s21, s22)` at real reference impedance `z_ref`.
pub fn abcd_to_s(
    m: &Abcd,
    z_ref: f64,
) -> Result<(Complex64, Complex64, Complex64, Complex64), SParamError> {
    if !(z_ref > 0.0) {
        return Err(SParamError::DegenerateNetwork);
    }
    let bz = m.b / z_ref;
    let cz = m.c * z_ref;
    let den = m.a + bz + cz + m.d;
    if den.norm() < 1e-300 || !den.is_finite() {
        return Err(SParamError::DegenerateNetwork);
    }
    let s11 = (m.a + bz - cz - m.d) / den;
    let s12 = 2.0 * m.determinant() / den;
    let s21 = Complex64::new(2.0, 0.0) / den;
    let s22 = (-m.a + bz - cz + m.d) / den;
    Ok((s11, s12, s21, s22))
}
