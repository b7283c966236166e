use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    reward, ActionSet, BandMeasure, DesignTask, Environment, RewardWeights, RlError, TrainConfig,
};
use crate::clustering::ActionClusterModel;
use crate::mesh::MeshModel;
use crate::nn::{a3c_loss, a3c_seeds, Checkpoint, Forward, NetConfig, NnError, PolicyValueNet, RmsProp};
use crate::sparams::SParamSweep;
use crate::surrogate::Surrogate;

/// `R_t = r_t + γ R_{t+1}` over the window, seeded with the bootstrap
/// value (zero after a terminal state).
pub fn n_step_returns(rewards: &[f64], bootstrap: f64, gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = bootstrap;
    for (o, r) in out.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *o = acc;
    }
    out
}

/// One stored step of a rollout.
#[derive(Debug, Clone)]
pub struct Transition {
    pub fwd: Forward,
    pub action: usize,
    pub reward: f64,
}

/// Accumulates the summed actor-critic loss gradient of a rollout into
/// `grads` and returns the summed loss. Advantages `R - V` are constants.
pub fn rollout_gradients(
    net: &PolicyValueNet,
    rollout: &[Transition],
    bootstrap: f64,
    gamma: f64,
    beta: f64,
    grads: &mut [f64],
) -> Result<f64, RlError> {
    let rewards: Vec<f64> = rollout.iter().map(|t| t.reward).collect();
    let returns = n_step_returns(&rewards, bootstrap, gamma);
    let mut total = 0.0;
    for (t, &ret) in rollout.iter().zip(&returns) {
        let v = t.fwd.value;
        let adv = ret - v;
        let loss = a3c_loss(&t.fwd.logits, t.action, adv, beta, v, ret);
        if !loss.is_finite() {
            return Err(RlError::Diverged(format!("non-finite loss {loss}")));
        }
        total += loss;
        let (dl, dv) = a3c_seeds(&t.fwd.logits, t.action, adv, beta, v, ret);
        net.backward(&t.fwd, &dl, dv, grads);
    }
    Ok(total)
}

/// One learning-curve row, written at the end of every episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub global_step: u64,
    pub episode: u64,
    #[serde(rename = "return")]
    pub ret: f64,
    pub f0_err_hz: f64,
    pub passband_rl_db: f64,
    pub wall_ms: u64,
}

/// Highest single-step reward design seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct BestDesign {
    pub mesh: MeshModel,
    pub sweep: SParamSweep,
    pub measure: BandMeasure,
    pub reward: f64,
    pub success: bool,
    pub global_step: u64,
}

/// Where to start: fresh or from a checkpoint.
#[derive(Debug, Clone, Default)]
pub struct TrainStart {
    pub net: Option<PolicyValueNet>,
    pub optimizer: Option<RmsProp>,
    pub global_step: u64,
    pub episode: u64,
}

impl TrainStart {
    pub fn resume(ck: Checkpoint) -> Self {
        Self {
            net: Some(ck.net),
            optimizer: ck.optimizer,
            global_step: ck.global_step,
            episode: ck.episode,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: PolicyValueNet,
    pub optimizer: RmsProp,
    pub curve: Vec<CurveRow>,
    pub best: BestDesign,
    /// Global step at which every threshold was first met.
    pub first_success_step: Option<u64>,
    pub global_step: u64,
    pub episodes: u64,
    pub actions: usize,
}

impl TrainOutcome {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            net: self.net.clone(),
            optimizer: Some(self.optimizer.clone()),
            global_step: self.global_step,
            episode: self.episodes,
        }
    }
}

/// Called after an update once `every` more global steps have passed.
pub struct CheckpointHook<'a> {
    pub every: u64,
    pub save: &'a mut (dyn FnMut(&Checkpoint) + Send),
}

struct Shared {
    net: PolicyValueNet,
    opt: RmsProp,
    global_step: u64,
    end_step: u64,
    episode: u64,
    curve: Vec<CurveRow>,
    best: BestDesign,
    first_success: Option<u64>,
    stop: bool,
    last_saved: u64,
    error: Option<RlError>,
}

/// Cluster-action agent.
pub fn train(
    task: DesignTask,
    weights: RewardWeights,
    surrogate: Surrogate,
    seed_mesh: &MeshModel,
    clusters: &ActionClusterModel,
    config: &TrainConfig,
    start: TrainStart,
    hook: Option<CheckpointHook<'_>>,
) -> Result<TrainOutcome, RlError> {
    let actions = ActionSet::from_clusters(clusters)?;
    let env = Environment::new(task, weights, surrogate, seed_mesh, actions, config)?;
    run(env, config, start, hook)
}

/// Raw vertex-action agent with one logit per (vertex, direction).
pub fn train_vertex_baseline(
    task: DesignTask,
    weights: RewardWeights,
    surrogate: Surrogate,
    seed_mesh: &MeshModel,
    config: &TrainConfig,
    start: TrainStart,
    hook: Option<CheckpointHook<'_>>,
) -> Result<TrainOutcome, RlError> {
    let actions = ActionSet::vertices(seed_mesh)?;
    let env = Environment::new(task, weights, surrogate, seed_mesh, actions, config)?;
    run(env, config, start, hook)
}

fn sample(pi: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in pi.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    pi.len() - 1
}

/// Shared-net training over `config.workers` threads; one worker runs
/// inline and is bit-reproducible.
pub fn run(
    env: Environment,
    config: &TrainConfig,
    start: TrainStart,
    hook: Option<CheckpointHook<'_>>,
) -> Result<TrainOutcome, RlError> {
    config.validate()?;
    let net_config = NetConfig {
        grid: env.grid_size(),
        svec_len: env.svec_len(),
        actions: env.actions.len(),
    };
    let net = match start.net {
        Some(n) if *n.config() == net_config => n,
        Some(n) => {
            return Err(RlError::Config(format!(
                "checkpoint network {:?} does not match the task's {:?}",
                n.config(),
                net_config
            )))
        }
        None => PolicyValueNet::new(net_config, config.seed)?,
    };
    let mut opt = start
        .optimizer
        .unwrap_or_else(|| RmsProp::new(net.params().len(), config.learning_rate));
    opt.lr = config.learning_rate;
    let init = env.initial().clone();
    let seed_reward = reward(&init.sweep, &init.measure, &env.task, &env.weights);
    let shared = Mutex::new(Shared {
        net,
        opt,
        global_step: start.global_step,
        end_step: start.global_step + config.max_steps,
        episode: start.episode,
        curve: Vec::new(),
        best: BestDesign {
            mesh: init.mesh.clone(),
            sweep: init.sweep.clone(),
            measure: init.measure,
            reward: seed_reward,
            success: super::meets_thresholds(&init.sweep, &env.task),
            global_step: start.global_step,
        },
        first_success: None,
        stop: false,
        last_saved: start.global_step,
        error: None,
    });
    let hook = hook.map(Mutex::new);
    let clock = Instant::now();
    if config.workers == 1 {
        worker(0, env.clone(), config, &shared, hook.as_ref(), clock);
    } else {
        std::thread::scope(|s| {
            for id in 0..config.workers {
                let env = env.clone();
                let (shared, hook) = (&shared, hook.as_ref());
                s.spawn(move || worker(id, env, config, shared, hook, clock));
            }
        });
    }
    let sh = shared.into_inner().expect("training state lock");
    if let Some(e) = sh.error {
        return Err(e);
    }
    Ok(TrainOutcome {
        net: sh.net,
        optimizer: sh.opt,
        curve: sh.curve,
        best: sh.best,
        first_success_step: sh.first_success,
        global_step: sh.global_step,
        episodes: sh.episode,
        actions: env.actions.len(),
    })
}

fn worker(
    id: usize,
    mut env: Environment,
    config: &TrainConfig,
    shared: &Mutex<Shared>,
    hook: Option<&Mutex<CheckpointHook<'_>>>,
    clock: Instant,
) {
    if let Err(e) = worker_loop(id, &mut env, config, shared, hook, clock) {
        let mut sh = shared.lock().expect("training state lock");
        sh.stop = true;
        sh.error.get_or_insert(e);
    }
}

fn worker_loop(
    id: usize,
    env: &mut Environment,
    config: &TrainConfig,
    shared: &Mutex<Shared>,
    hook: Option<&Mutex<CheckpointHook<'_>>>,
    clock: Instant,
) -> Result<(), RlError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9e37_79b9).wrapping_add(id as u64 + 1));
    let mut local = shared.lock().expect("training state lock").net.clone();
    let mut episode_return = 0.0;
    env.reset();
    loop {
        {
            let sh = shared.lock().expect("training state lock");
            if sh.stop || sh.global_step >= sh.end_step {
                return Ok(());
            }
            local.params_mut().copy_from_slice(sh.net.params());
        }
        let mut rollout = Vec::with_capacity(config.n_step);
        let mut terminal = false;
        for _ in 0..config.n_step {
            let step = {
                let mut sh = shared.lock().expect("training state lock");
                if sh.stop || sh.global_step >= sh.end_step {
                    break;
                }
                sh.global_step += 1;
                sh.global_step
            };
            let fwd = local.forward(&env.observe()?)?;
            let action = sample(&fwd.pi, &mut rng);
            let out = env.step(action)?;
            episode_return += out.reward;
            rollout.push(Transition {
                fwd,
                action,
                reward: out.reward,
            });
            let mut sh = shared.lock().expect("training state lock");
            if !out.rejected && out.reward > sh.best.reward {
                let st = env.state();
                sh.best = BestDesign {
                    mesh: st.mesh.clone(),
                    sweep: st.sweep.clone(),
                    measure: st.measure,
                    reward: out.reward,
                    success: out.success,
                    global_step: step,
                };
            }
            if out.success {
                sh.first_success.get_or_insert(step);
                if config.stop_on_success {
                    sh.stop = true;
                }
            }
            if out.done {
                sh.episode += 1;
                let m = env.state().measure;
                let row = CurveRow {
                    global_step: step,
                    episode: sh.episode,
                    ret: episode_return,
                    f0_err_hz: (env.task.f0_hz - m.f0).abs(),
                    passband_rl_db: m.passband_rl_db,
                    wall_ms: clock.elapsed().as_millis() as u64,
                };
                sh.curve.push(row);
                drop(sh);
                env.reset();
                episode_return = 0.0;
                terminal = true;
                break;
            }
        }
        if rollout.is_empty() {
            return Ok(());
        }
        let bootstrap = if terminal { 0.0 } else { local.forward(&env.observe()?)?.value };
        let mut grads = vec![0.0; local.params().len()];
        rollout_gradients(&local, &rollout, bootstrap, config.gamma, config.entropy_beta, &mut grads)?;
        let mut sh = shared.lock().expect("training state lock");
        let Shared { net, opt, .. } = &mut *sh;
        opt.step(net, &grads).map_err(|e| match e {
            NnError::Diverged(block) => RlError::Diverged(format!("non-finite gradient in block {block}")),
            other => other.into(),
        })?;
        if let Some(h) = hook {
            let mut h = h.lock().expect("checkpoint hook lock");
            if h.every > 0 && sh.global_step - sh.last_saved >= h.every {
                sh.last_saved = sh.global_step;
                let ck = Checkpoint {
                    net: sh.net.clone(),
                    optimizer: Some(sh.opt.clone()),
                    global_step: sh.global_step,
                    episode: sh.episode,
                };
                (h.save)(&ck);
            }
        }
    }
}
