//! Design environment and advantage actor-critic training.
//!
//! The environment state is a mesh plus its sweep; an action moves every
//! member of one action cluster (or a single vertex, for the baseline) by
//! a fixed step. Workers collect `k`-step rollouts, form bootstrapped
//! returns and push one clipped RMSProp update per rollout to a shared net.

mod a3c;
mod env;
mod measure;

pub use a3c::{
    n_step_returns, rollout_gradients, run, train, train_vertex_baseline, BestDesign, CheckpointHook,
    CurveRow, TrainOutcome, TrainStart, Transition,
};
pub use env::{observation, ActionSet, EnvState, Environment, StepOutcome, Termination};
pub use measure::{design_band, measure_band, meets_thresholds, reward, reward_terms, BandMeasure, RewardTerms};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::ClusterError;
use crate::mesh::MeshError;
use crate::nn::NnError;
use crate::surrogate::{CircuitKind, SurrogateError};

#[derive(Debug, Error)]
pub enum RlError {
    #[error("invalid task: {0}")]
    Task(String),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("no effective actions")]
    NoActions,
    #[error("unknown action {0}")]
    UnknownAction(usize),
    #[error("seed mesh: {0}")]
    Seed(String),
    #[error("diverged: {0}")]
    Diverged(String),
    #[error(transparent)]
    Net(#[from] NnError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Design targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignTask {
    pub kind: CircuitKind,
    pub f0_hz: f64,
    pub f1_hz: f64,
    pub f2_hz: f64,
    /// Minimum passband dB(s21).
    #[serde(default = "default_il_floor")]
    pub il_floor_db: f64,
    /// Maximum passband dB(s11).
    #[serde(default = "default_rl_ceiling")]
    pub rl_ceiling_db: f64,
    /// Optional `(length, width)` limit in millimetres.
    #[serde(default)]
    pub size_bound_mm: Option<(f64, f64)>,
}

fn default_il_floor() -> f64 {
    -0.5
}

fn default_rl_ceiling() -> f64 {
    -20.0
}

impl DesignTask {
    pub fn new(kind: CircuitKind, f0_hz: f64, f1_hz: f64, f2_hz: f64) -> Self {
        Self {
            kind,
            f0_hz,
            f1_hz,
            f2_hz,
            il_floor_db: default_il_floor(),
            rl_ceiling_db: default_rl_ceiling(),
            size_bound_mm: None,
        }
    }

    pub fn validate(&self) -> Result<(), RlError> {
        if !(self.f1_hz < self.f0_hz && self.f0_hz < self.f2_hz) || !(self.f1_hz > 0.0) {
            return Err(RlError::Task(format!(
                "need 0 < f1 < f0 < f2, got {} / {} / {}",
                self.f1_hz, self.f0_hz, self.f2_hz
            )));
        }
        if !self.il_floor_db.is_finite() || !self.rl_ceiling_db.is_finite() {
            return Err(RlError::Task("loss thresholds must be finite".into()));
        }
        Ok(())
    }
}

/// Reward shaping constants; frequencies in hertz.
///
/// The defaults keep every term of order one. The clamp sits near one grid
/// step because the measured centre is quantised to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub eps_clamp_hz: f64,
    pub success_bonus: f64,
    pub invalid_penalty: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            beta1: 1e8,
            beta2: 1e8,
            beta3: 0.05,
            eps_clamp_hz: 1e8,
            success_bonus: 10.0,
            invalid_penalty: -1.0,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), RlError> {
        let all = [
            self.beta1,
            self.beta2,
            self.beta3,
            self.eps_clamp_hz,
            self.success_bonus,
            self.invalid_penalty,
        ];
        if all.iter().any(|v| !v.is_finite()) || !(self.eps_clamp_hz > 0.0) {
            return Err(RlError::Config("reward weights must be finite with eps_clamp_hz > 0".into()));
        }
        Ok(())
    }

    /// Largest reward of a single step.
    pub fn max_step_reward(&self, task: &DesignTask) -> f64 {
        (self.beta1 + self.beta2) / self.eps_clamp_hz - self.beta3.max(0.0) * task.rl_ceiling_db.min(0.0)
            + self.success_bonus.max(0.0)
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub workers: usize,
    /// Rollout length between updates.
    pub n_step: usize,
    pub gamma: f64,
    pub entropy_beta: f64,
    pub learning_rate: f64,
    /// Total environment steps over all workers.
    pub max_steps: u64,
    /// Episode cap T.
    pub episode_cap: usize,
    /// Magnitude of every vertex move, mm.
    pub delta_rl_mm: f64,
    pub grid_size: usize,
    pub seed: u64,
    /// End training at the first step that meets every threshold.
    pub stop_on_success: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            workers: 4,
            n_step: 5,
            gamma: 0.99,
            entropy_beta: 0.01,
            learning_rate: 7e-4,
            max_steps: 20_000,
            episode_cap: 100,
            delta_rl_mm: 0.05,
            grid_size: 32,
            seed: 0,
            stop_on_success: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |m: &str| Err(RlError::Config(m.to_string()));
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if self.n_step == 0 {
            return bad("n_step must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.episode_cap == 0 {
            return bad("episode_cap must be at least 1");
        }
        if !(self.delta_rl_mm > 0.0) || !(self.learning_rate >= 0.0) || !self.entropy_beta.is_finite() {
            return bad("delta_rl_mm must be positive, learning_rate non-negative, entropy_beta finite");
        }
        if self.grid_size < 8 {
            return bad("grid_size must be at least 8");
        }
        Ok(())
    }
}
