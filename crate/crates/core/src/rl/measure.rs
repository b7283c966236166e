//! Band measurements of a sweep, task thresholds and the shaped reward.

use serde::{Deserialize, Serialize};

use super::{DesignTask, RewardWeights};
use crate::sparams::{db_mag, SParamSweep};
use crate::surrogate::CircuitKind;

/// Measured centre, band edges and passband statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandMeasure {
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
    /// Mean dB(s11) over the measured band.
    pub passband_rl_db: f64,
    /// Minimum dB(s21) over the measured band; for one-ports the accepted
    /// power `1 - |s11|²` in dB.
    pub passband_il_db: f64,
}

/// Transmission magnitude in dB, or accepted power for one-ports.
fn through_db(sweep: &SParamSweep, one_port: bool) -> Vec<f64> {
    sweep
        .points()
        .iter()
        .map(|p| {
            if one_port {
                let accepted = (1.0 - p.s11.norm_sqr()).max(0.0);
                if accepted == 0.0 {
                    crate::sparams::DB_FLOOR
                } else {
                    (10.0 * accepted.log10()).max(crate::sparams::DB_FLOOR)
                }
            } else {
                db_mag(p.s21)
            }
        })
        .collect()
}

/// Linear interpolation of the frequency where `db` crosses `level`
/// between indices `i` and `j`.
fn crossing(f: &[f64], db: &[f64], i: usize, j: usize, level: f64) -> f64 {
    let (a, b) = (db[i], db[j]);
    if a == b {
        return f[i];
    }
    f[i] + (level - a) / (b - a) * (f[j] - f[i])
}

/// Peak of transmission (two-ports) or of accepted power (one-ports), the
/// nearest -3 dB points on either side, and passband statistics.
///
/// The lowest-index maximum wins ties; when no crossing exists on a side
/// that edge falls back to the sweep end.
pub fn measure_band(sweep: &SParamSweep, kind: CircuitKind) -> BandMeasure {
    let f = sweep.frequencies();
    let t = through_db(sweep, kind.is_one_port());
    let s11 = sweep.s11_db();
    let peak = (0..t.len()).fold(0, |best, i| if t[i] > t[best] { i } else { best });
    let level = t[peak] - 3.0;
    let f1 = (0..peak)
        .rev()
        .find(|&i| t[i] < level)
        .map_or(f[0], |i| crossing(&f, &t, i, i + 1, level));
    let f2 = (peak + 1..t.len())
        .find(|&i| t[i] < level)
        .map_or(f[f.len() - 1], |i| crossing(&f, &t, i - 1, i, level));
    let inside: Vec<usize> = (0..f.len()).filter(|&i| f[i] >= f1 && f[i] <= f2).collect();
    let passband_rl_db = inside.iter().map(|&i| s11[i]).sum::<f64>() / inside.len() as f64;
    let passband_il_db = inside.iter().map(|&i| t[i]).fold(f64::INFINITY, f64::min);
    BandMeasure {
        f0: f[peak],
        f1,
        f2,
        passband_rl_db,
        passband_il_db,
    }
}

/// Indices of grid frequencies inside the design band `[f1, f2]`.
pub fn design_band(sweep: &SParamSweep, task: &DesignTask) -> Vec<usize> {
    sweep
        .points()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.frequency >= task.f1_hz && p.frequency <= task.f2_hz)
        .map(|(i, _)| i)
        .collect()
}

/// Filters and lines: every design-band grid point has s11 at or below the
/// return-loss ceiling and s21 at or above the insertion-loss floor.
/// Antennas: s11 at the grid point nearest the centre frequency is at or
/// below the ceiling.
pub fn meets_thresholds(sweep: &SParamSweep, task: &DesignTask) -> bool {
    let pts = sweep.points();
    if task.kind.is_one_port() {
        let i = (0..pts.len()).fold(0, |best, i| {
            if (pts[i].frequency - task.f0_hz).abs() < (pts[best].frequency - task.f0_hz).abs() {
                i
            } else {
                best
            }
        });
        return db_mag(pts[i].s11) <= task.rl_ceiling_db;
    }
    let band = design_band(sweep, task);
    !band.is_empty()
        && band
            .iter()
            .all(|&i| db_mag(pts[i].s11) <= task.rl_ceiling_db && db_mag(pts[i].s21) >= task.il_floor_db)
}

/// Per-term reward breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardTerms {
    pub centre: f64,
    pub edges: f64,
    pub depth: f64,
    pub bonus: f64,
}

impl RewardTerms {
    pub fn total(&self) -> f64 {
        self.centre + self.edges + self.depth + self.bonus
    }
}

/// `β1/max(|f0-f0'|, ε) + β2/max(|f1-f1'|+|f2-f2'|, ε) - β3 mean(EL)` plus
/// the success bonus.
///
/// `EL_i` is dB(s11) at each design-band grid point, clamped to
/// `[rl_ceiling, l1]` where `l1` is the curve maximum; the lower clamp
/// stops rewarding depth once the threshold is met.
pub fn reward_terms(sweep: &SParamSweep, m: &BandMeasure, task: &DesignTask, w: &RewardWeights) -> RewardTerms {
    let centre = w.beta1 / (task.f0_hz - m.f0).abs().max(w.eps_clamp_hz);
    let edges = w.beta2 / ((task.f1_hz - m.f1).abs() + (task.f2_hz - m.f2).abs()).max(w.eps_clamp_hz);
    let s11 = sweep.s11_db();
    let l1 = s11.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let band = design_band(sweep, task);
    let depth = if band.is_empty() {
        0.0
    } else {
        let mean = band
            .iter()
            .map(|&i| s11[i].min(l1).max(task.rl_ceiling_db))
            .sum::<f64>()
            / band.len() as f64;
        -w.beta3 * mean
    };
    let bonus = if meets_thresholds(sweep, task) { w.success_bonus } else { 0.0 };
    RewardTerms {
        centre,
        edges,
        depth,
        bonus,
    }
}

pub fn reward(sweep: &SParamSweep, m: &BandMeasure, task: &DesignTask, w: &RewardWeights) -> f64 {
    reward_terms(sweep, m, task, w).total()
}
