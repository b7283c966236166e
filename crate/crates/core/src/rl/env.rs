use serde::{Deserialize, Serialize};

use super::{measure_band, meets_thresholds, reward, BandMeasure, DesignTask, RewardWeights, RlError, TrainConfig};
use crate::clustering::ActionClusterModel;
use crate::mesh::{rasterize_in, Direction, Frame, MeshError, MeshModel, VertexAction};
use crate::nn::{standardize_db, NetInput};
use crate::sparams::{default_grid, SParamSweep};
use crate::surrogate::Surrogate;

/// What one policy logit does to the mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionSet {
    /// Each action moves every member of one effective cluster.
    Clusters {
        ids: Vec<usize>,
        members: Vec<Vec<(usize, Direction)>>,
    },
    /// Each action moves one vertex.
    Vertices(Vec<(usize, Direction)>),
}

impl ActionSet {
    pub fn from_clusters(model: &ActionClusterModel) -> Result<Self, RlError> {
        let ids = model.effective_clusters();
        if ids.is_empty() {
            return Err(RlError::NoActions);
        }
        let members = ids.iter().map(|&c| model.members(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(ActionSet::Clusters { ids, members })
    }

    pub fn vertices(mesh: &MeshModel) -> Result<Self, RlError> {
        let space = mesh.vertex_action_space();
        if space.is_empty() {
            return Err(RlError::NoActions);
        }
        Ok(ActionSet::Vertices(space))
    }

    pub fn len(&self) -> usize {
        match self {
            ActionSet::Clusters { ids, .. } => ids.len(),
            ActionSet::Vertices(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn moves(&self, action: usize) -> Result<&[(usize, Direction)], RlError> {
        match self {
            ActionSet::Clusters { members, .. } => members.get(action).map(|m| m.as_slice()),
            ActionSet::Vertices(v) => v.get(action).map(std::slice::from_ref),
        }
        .ok_or(RlError::UnknownAction(action))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub mesh: MeshModel,
    pub sweep: SParamSweep,
    pub measure: BandMeasure,
    pub steps: usize,
    pub done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Success,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub done: bool,
    /// The move was geometrically invalid; the state did not change.
    pub rejected: bool,
    pub success: bool,
    pub termination: Option<Termination>,
}

/// Network input for a mesh and its sweep.
pub fn observation(mesh: &MeshModel, sweep: &SParamSweep, frame: &Frame, grid: usize, one_port: bool) -> Result<NetInput, RlError> {
    let g = rasterize_in(mesh, frame, grid)?;
    let mut svec: Vec<f64> = sweep.s11_db().into_iter().map(standardize_db).collect();
    if !one_port {
        svec.extend(sweep.s21_db().into_iter().map(standardize_db));
    }
    Ok(NetInput { grid: g.as_f64(), svec })
}

/// One design episode at a time over a fixed seed mesh.
#[derive(Debug, Clone)]
pub struct Environment {
    pub task: DesignTask,
    pub weights: RewardWeights,
    pub surrogate: Surrogate,
    pub actions: ActionSet,
    freqs: Vec<f64>,
    frame: Frame,
    grid: usize,
    delta_mm: f64,
    cap: usize,
    initial: EnvState,
    state: EnvState,
}

impl Environment {
    pub fn new(
        task: DesignTask,
        weights: RewardWeights,
        surrogate: Surrogate,
        seed_mesh: &MeshModel,
        actions: ActionSet,
        config: &TrainConfig,
    ) -> Result<Self, RlError> {
        task.validate()?;
        weights.validate()?;
        config.validate()?;
        if actions.is_empty() {
            return Err(RlError::NoActions);
        }
        let mut mesh = seed_mesh.clone();
        if task.size_bound_mm.is_some() {
            mesh.set_bound_mm(task.size_bound_mm);
        }
        let violations = mesh.validate();
        if !violations.is_empty() {
            return Err(RlError::Seed(format!("{violations:?}")));
        }
        let freqs = default_grid(task.f0_hz);
        let sweep = surrogate.simulate(&mesh, &freqs)?;
        let measure = measure_band(&sweep, task.kind);
        let frame = Frame::around(&mesh)?;
        let initial = EnvState {
            mesh,
            sweep,
            measure,
            steps: 0,
            done: false,
        };
        Ok(Self {
            task,
            weights,
            surrogate,
            actions,
            freqs,
            frame,
            grid: config.grid_size,
            delta_mm: config.delta_rl_mm,
            cap: config.episode_cap,
            state: initial.clone(),
            initial,
        })
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn initial(&self) -> &EnvState {
        &self.initial
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    pub fn reset(&mut self) {
        self.state = self.initial.clone();
    }

    pub fn observe(&self) -> Result<NetInput, RlError> {
        observation(
            &self.state.mesh,
            &self.state.sweep,
            &self.frame,
            self.grid,
            self.task.kind.is_one_port(),
        )
    }

    /// Length of the network input's curve vector.
    pub fn svec_len(&self) -> usize {
        self.freqs.len() * if self.task.kind.is_one_port() { 1 } else { 2 }
    }

    pub fn grid_size(&self) -> usize {
        self.grid
    }

    /// Applies every move of `action` at once. A geometric rejection or a
    /// solver failure leaves the state unchanged and returns the invalid
    /// penalty; the step still counts towards the episode cap.
    pub fn step(&mut self, action: usize) -> Result<StepOutcome, RlError> {
        if self.state.done {
            return Err(RlError::Config("step after episode end; call reset".into()));
        }
        let moves = self
            .actions
            .moves(action)?
            .iter()
            .map(|&(v, d)| VertexAction::new(v, d, self.delta_mm))
            .collect::<Result<Vec<_>, _>>()?;
        self.state.steps += 1;
        let timeout = self.state.steps >= self.cap;
        let candidate = match self.state.mesh.apply_actions(&moves) {
            Ok(m) => self.surrogate.simulate(&m, &self.freqs).ok().map(|s| (m, s)),
            Err(MeshError::Rejected(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let Some((mesh, sweep)) = candidate else {
            self.state.done = timeout;
            return Ok(StepOutcome {
                reward: self.weights.invalid_penalty,
                done: timeout,
                rejected: true,
                success: false,
                termination: timeout.then_some(Termination::Timeout),
            });
        };
        let measure = measure_band(&sweep, self.task.kind);
        let r = reward(&sweep, &measure, &self.task, &self.weights);
        let success = meets_thresholds(&sweep, &self.task);
        self.state.mesh = mesh;
        self.state.sweep = sweep;
        self.state.measure = measure;
        let termination = if success {
            Some(Termination::Success)
        } else if timeout {
            Some(Termination::Timeout)
        } else {
            None
        };
        self.state.done = termination.is_some();
        Ok(StepOutcome {
            reward: r,
            done: self.state.done,
            rejected: false,
            success,
            termination,
        })
    }
}
