//! Analytic S-parameter solvers standing in for full-wave simulation.
//!
//! Three circuit families are covered: stepped microstrip lines, a
//! two-resonator coupled bandpass filter and a rectangular patch antenna.
//! Each is driven by parameters extracted from a [`MeshModel`].

mod extract;
mod filter;
mod microstrip;
mod patch;

pub use extract::{
    extract_filter_params, extract_line_segments, extract_patch_params, polygon_crossings,
};
pub use filter::{filter_sweep, CoupledResonatorParams};
pub use microstrip::{microstrip_params, tl_sweep, MicrostripSegment};
pub use patch::{patch_input_admittance, patch_sweep, PatchParams};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::MeshModel;
use crate::sparams::{SParamError, SParamSweep, Z_REF_DEFAULT};

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;
/// Free-space wave impedance, ohm.
pub const ETA0: f64 = 376.730_313_668;

#[derive(Debug, Error, PartialEq)]
pub enum SurrogateError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("singular coupling matrix at {frequency} Hz")]
    Singular { frequency: f64 },
    #[error("mesh: {0}")]
    MeshShape(String),
    #[error("geometry collision")]
    GeometryCollision,
    #[error(transparent)]
    SParam(#[from] SParamError),
}

/// Circuit family solved by a [`Surrogate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitKind {
    Line,
    Filter,
    Antenna,
}

impl CircuitKind {
    pub fn is_one_port(self) -> bool {
        matches!(self, CircuitKind::Antenna)
    }
}

/// Substrate and geometric map constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Material {
    pub er: f64,
    pub h_mm: f64,
    /// Nominal resonator strip width used for the filter's effective permittivity.
    pub resonator_width_mm: f64,
    /// Coupling map `M1 = k0 exp(-g / g0)`.
    pub k0: f64,
    pub g0_mm: f64,
    /// Tap map `M0 = tap_base + tap_slope * |tap - centre|`.
    pub tap_base: f64,
    pub tap_slope_per_mm: f64,
    /// Vertices within this fraction of the extent from an end form that end.
    pub end_group_fraction: f64,
    pub gap_samples: usize,
    pub z_ref: f64,
}

impl Default for Material {
    fn default() -> Self {
        Self {
            er: 12.9,
            h_mm: 0.5,
            resonator_width_mm: 0.5,
            k0: 0.3,
            g0_mm: 0.3,
            tap_base: 0.2,
            tap_slope_per_mm: 0.1,
            end_group_fraction: 0.05,
            gap_samples: 64,
            z_ref: Z_REF_DEFAULT,
        }
    }
}

/// Mesh-to-sweep solver for one circuit family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surrogate {
    pub kind: CircuitKind,
    pub material: Material,
}

impl Surrogate {
    pub fn new(kind: CircuitKind, material: Material) -> Self {
        Self { kind, material }
    }

    pub fn simulate(&self, mesh: &MeshModel, freqs: &[f64]) -> Result<SParamSweep, SurrogateError> {
        match self.kind {
            CircuitKind::Line => {
                let segs = extract_line_segments(mesh, &self.material)?;
                tl_sweep(&segs, freqs, self.material.z_ref)
            }
            CircuitKind::Filter => {
                let p = extract_filter_params(mesh, &self.material)?;
                filter_sweep(&p, freqs)
            }
            CircuitKind::Antenna => {
                let p = extract_patch_params(mesh, &self.material)?;
                patch_sweep(&p, freqs, self.material.z_ref)
            }
        }
    }

    /// Named scalar design parameters the mesh maps to.
    pub fn parameters(&self, mesh: &MeshModel) -> Result<Vec<(&'static str, f64)>, SurrogateError> {
        Ok(match self.kind {
            CircuitKind::Line => extract_line_segments(mesh, &self.material)?
                .iter()
                .flat_map(|s| [("width", s.width_mm), ("length", s.length_mm)])
                .collect(),
            CircuitKind::Filter => {
                let p = extract_filter_params(mesh, &self.material)?;
                vec![("f1", p.f1), ("f2", p.f2), ("m0", p.m0), ("m1", p.m1), ("m2", p.m2)]
            }
            CircuitKind::Antenna => {
                let p = extract_patch_params(mesh, &self.material)?;
                vec![
                    ("length", p.length_mm),
                    ("width", p.width_mm),
                    ("feed_width", p.feed_width_mm),
                    ("feed_length", p.feed_length_mm),
                    ("feed_offset", p.feed_offset_mm),
                ]
            }
        })
    }
}

pub(crate) fn check_freqs(freqs: &[f64]) -> Result<(), SurrogateError> {
    if freqs.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
        return Err(SurrogateError::InvalidParam("frequencies must be positive".into()));
    }
    Ok(())
}
