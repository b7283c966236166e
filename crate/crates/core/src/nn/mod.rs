//! Policy-value network with hand-written reverse mode.
//!
//! Two encoders share one trunk: a small convolutional stack reads the
//! occupancy grid, an MLP reads the standardized S-parameter curves, and
//! their embeddings are concatenated before the actor and critic heads.
//! All parameters live in one flat `f64` vector split into named blocks,
//! which keeps optimizer state, gradient buffers and checkpoints trivial.

mod checkpoint;
mod init;
mod layers;
mod loss;
mod optim;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use layers::{conv3, conv3_back, dense, dense_back};
pub use loss::{a3c_loss, a3c_seeds, entropy, log_softmax, softmax};
pub use optim::RmsProp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CONV1_CHANNELS: usize = 8;
pub const CONV2_CHANNELS: usize = 16;
pub const GRID_EMBED: usize = 64;
pub const CURVE_HIDDEN: usize = 512;
pub const CURVE_EMBED: usize = 256;
pub const HEAD_HIDDEN: usize = 64;
pub const TRUNK: usize = GRID_EMBED + CURVE_EMBED;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("diverged: non-finite gradient in block {0}")]
    Diverged(String),
    #[error("bad network configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Input sizes that fix every parameter shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    /// Side of the square occupancy grid.
    pub grid: usize,
    /// Length of the standardized S-parameter vector.
    pub svec_len: usize,
    /// Number of policy logits.
    pub actions: usize,
}

impl NetConfig {
    fn check(&self) -> Result<(), NnError> {
        if self.grid < 5 || self.svec_len == 0 || self.actions == 0 {
            return Err(NnError::Config(format!(
                "grid {} (min 5), svec {} and actions {} must be positive",
                self.grid, self.svec_len, self.actions
            )));
        }
        Ok(())
    }

    fn conv_out(&self) -> usize {
        CONV2_CHANNELS * (self.grid - 4) * (self.grid - 4)
    }

    /// `(name, shape)` of every parameter block in storage order.
    pub fn layout(&self) -> Vec<(&'static str, Vec<usize>)> {
        vec![
            ("conv1.w", vec![CONV1_CHANNELS, 1, 3, 3]),
            ("conv1.b", vec![CONV1_CHANNELS]),
            ("conv2.w", vec![CONV2_CHANNELS, CONV1_CHANNELS, 3, 3]),
            ("conv2.b", vec![CONV2_CHANNELS]),
            ("grid_fc.w", vec![GRID_EMBED, self.conv_out()]),
            ("grid_fc.b", vec![GRID_EMBED]),
            ("curve_fc1.w", vec![CURVE_HIDDEN, self.svec_len]),
            ("curve_fc1.b", vec![CURVE_HIDDEN]),
            ("curve_fc2.w", vec![CURVE_EMBED, CURVE_HIDDEN]),
            ("curve_fc2.b", vec![CURVE_EMBED]),
            ("actor_fc1.w", vec![HEAD_HIDDEN, TRUNK]),
            ("actor_fc1.b", vec![HEAD_HIDDEN]),
            ("actor_fc2.w", vec![self.actions, HEAD_HIDDEN]),
            ("actor_fc2.b", vec![self.actions]),
            ("critic_fc1.w", vec![HEAD_HIDDEN, TRUNK]),
            ("critic_fc1.b", vec![HEAD_HIDDEN]),
            ("critic_fc2.w", vec![1, HEAD_HIDDEN]),
            ("critic_fc2.b", vec![1]),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.layout().iter().map(|(_, s)| s.iter().product::<usize>()).sum()
    }
}

// indices into the layout
const CONV1_W: usize = 0;
const CONV1_B: usize = 1;
const CONV2_W: usize = 2;
const CONV2_B: usize = 3;
const GRID_W: usize = 4;
const GRID_B: usize = 5;
const CURVE1_W: usize = 6;
const CURVE1_B: usize = 7;
const CURVE2_W: usize = 8;
const CURVE2_B: usize = 9;
const ACTOR1_W: usize = 10;
const ACTOR1_B: usize = 11;
const ACTOR2_W: usize = 12;
const ACTOR2_B: usize = 13;
const CRITIC1_W: usize = 14;
const CRITIC1_B: usize = 15;
const CRITIC2_W: usize = 16;
const CRITIC2_B: usize = 17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

fn blocks_of(config: &NetConfig) -> Vec<Block> {
    let mut offset = 0;
    config
        .layout()
        .into_iter()
        .map(|(name, shape)| {
            let len = shape.iter().product();
            let b = Block {
                name: name.to_string(),
                shape,
                offset,
                len,
            };
            offset += len;
            b
        })
        .collect()
}

/// Network input: occupancy grid and standardized curves.
#[derive(Debug, Clone, PartialEq)]
pub struct NetInput {
    /// Row-major `grid × grid` occupancy in {0, 1}.
    pub grid: Vec<f64>,
    pub svec: Vec<f64>,
}

/// The fixed affine standardization `(dB + 100) / 100`.
pub fn standardize_db(db: f64) -> f64 {
    (db + 100.0) / 100.0
}

/// Activations kept for the reverse pass.
#[derive(Debug, Clone)]
pub struct Forward {
    input: NetInput,
    h1: Vec<f64>,
    h2: Vec<f64>,
    trunk: Vec<f64>,
    c1: Vec<f64>,
    c2: Vec<f64>,
    actor_h: Vec<f64>,
    critic_h: Vec<f64>,
    pub logits: Vec<f64>,
    pub pi: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyValueNet {
    config: NetConfig,
    blocks: Vec<Block>,
    params: Vec<f64>,
}

impl PolicyValueNet {
    /// All parameters zero.
    pub fn zeros(config: NetConfig) -> Result<Self, NnError> {
        config.check()?;
        let blocks = blocks_of(&config);
        let n = config.param_count();
        Ok(Self {
            config,
            blocks,
            params: vec![0.0; n],
        })
    }

    /// Orthogonal weights (gain √2 into ReLU, 1 into tanh or the trunk,
    /// 0.01 on the output heads) and zero biases.
    pub fn new(config: NetConfig, seed: u64) -> Result<Self, NnError> {
        let mut net = Self::zeros(config)?;
        init::orthogonal_init(&mut net, seed);
        Ok(net)
    }

    pub fn from_params(config: NetConfig, params: Vec<f64>) -> Result<Self, NnError> {
        let mut net = Self::zeros(config)?;
        if params.len() != net.params.len() {
            return Err(NnError::DimensionMismatch {
                what: "parameters",
                expected: net.params.len(),
                found: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Parameters of the named block.
    pub fn block(&self, name: &str) -> Option<&[f64]> {
        self.blocks
            .iter()
            .find(|b| b.name == name)
            .map(|b| &self.params[b.offset..b.offset + b.len])
    }

    /// Name of the block containing flat index `i`.
    pub fn block_of(&self, i: usize) -> &str {
        self.blocks
            .iter()
            .find(|b| i >= b.offset && i < b.offset + b.len)
            .map_or("?", |b| b.name.as_str())
    }

    fn p(&self, i: usize) -> &[f64] {
        let b = &self.blocks[i];
        &self.params[b.offset..b.offset + b.len]
    }

    pub fn forward(&self, input: &NetInput) -> Result<Forward, NnError> {
        let g = self.config.grid;
        if input.grid.len() != g * g {
            return Err(NnError::DimensionMismatch {
                what: "grid",
                expected: g * g,
                found: input.grid.len(),
            });
        }
        if input.svec.len() != self.config.svec_len {
            return Err(NnError::DimensionMismatch {
                what: "svec",
                expected: self.config.svec_len,
                found: input.svec.len(),
            });
        }
        let relu = |v: &mut Vec<f64>| v.iter_mut().for_each(|x| *x = x.max(0.0));
        let tanh = |v: &mut Vec<f64>| v.iter_mut().for_each(|x| *x = x.tanh());

        let mut h1 = vec![0.0; CONV1_CHANNELS * (g - 2) * (g - 2)];
        conv3(self.p(CONV1_W), self.p(CONV1_B), &input.grid, 1, g, &mut h1);
        relu(&mut h1);
        let mut h2 = vec![0.0; self.config.conv_out()];
        conv3(self.p(CONV2_W), self.p(CONV2_B), &h1, CONV1_CHANNELS, g - 2, &mut h2);
        relu(&mut h2);

        let mut trunk = vec![0.0; TRUNK];
        dense(self.p(GRID_W), self.p(GRID_B), &h2, &mut trunk[..GRID_EMBED]);
        let mut c1 = vec![0.0; CURVE_HIDDEN];
        dense(self.p(CURVE1_W), self.p(CURVE1_B), &input.svec, &mut c1);
        tanh(&mut c1);
        let mut c2 = vec![0.0; CURVE_EMBED];
        dense(self.p(CURVE2_W), self.p(CURVE2_B), &c1, &mut c2);
        tanh(&mut c2);
        trunk[GRID_EMBED..].copy_from_slice(&c2);

        let mut actor_h = vec![0.0; HEAD_HIDDEN];
        dense(self.p(ACTOR1_W), self.p(ACTOR1_B), &trunk, &mut actor_h);
        tanh(&mut actor_h);
        let mut logits = vec![0.0; self.config.actions];
        dense(self.p(ACTOR2_W), self.p(ACTOR2_B), &actor_h, &mut logits);

        let mut critic_h = vec![0.0; HEAD_HIDDEN];
        dense(self.p(CRITIC1_W), self.p(CRITIC1_B), &trunk, &mut critic_h);
        tanh(&mut critic_h);
        let mut value = [0.0];
        dense(self.p(CRITIC2_W), self.p(CRITIC2_B), &critic_h, &mut value);

        Ok(Forward {
            input: input.clone(),
            h1,
            h2,
            trunk,
            c1,
            c2,
            pi: softmax(&logits),
            logits,
            actor_h,
            critic_h,
            value: value[0],
        })
    }

    /// Accumulates into `grads` the parameter gradient of a scalar loss
    /// whose derivatives with respect to the logits and the value are the
    /// given seeds.
    pub fn backward(&self, fwd: &Forward, dlogits: &[f64], dvalue: f64, grads: &mut [f64]) {
        assert_eq!(grads.len(), self.params.len(), "gradient buffer length");
        assert_eq!(dlogits.len(), self.config.actions, "logit seed length");
        let g = self.config.grid;
        let spans: Vec<(usize, usize)> = self.blocks.iter().map(|b| (b.offset, b.len)).collect();
        // split the gradient buffer into one slice per block
        let mut parts: Vec<&mut [f64]> = Vec::with_capacity(spans.len());
        let mut rest = grads;
        for &(_, len) in &spans {
            let (head, tail) = rest.split_at_mut(len);
            parts.push(head);
            rest = tail;
        }
        let tanh_back = |dy: &mut [f64], y: &[f64]| dy.iter_mut().zip(y).for_each(|(d, v)| *d *= 1.0 - v * v);

        let mut dtrunk = vec![0.0; TRUNK];
        let mut tmp = vec![0.0; TRUNK];

        let mut dah = vec![0.0; HEAD_HIDDEN];
        {
            let (w, b) = two(&mut parts, ACTOR2_W, ACTOR2_B);
            dense_back(self.p(ACTOR2_W), &fwd.actor_h, dlogits, w, b, Some(&mut dah));
        }
        tanh_back(&mut dah, &fwd.actor_h);
        {
            let (w, b) = two(&mut parts, ACTOR1_W, ACTOR1_B);
            dense_back(self.p(ACTOR1_W), &fwd.trunk, &dah, w, b, Some(&mut tmp));
        }
        dtrunk.iter_mut().zip(&tmp).for_each(|(d, t)| *d += t);

        let mut dch = vec![0.0; HEAD_HIDDEN];
        {
            let (w, b) = two(&mut parts, CRITIC2_W, CRITIC2_B);
            dense_back(self.p(CRITIC2_W), &fwd.critic_h, &[dvalue], w, b, Some(&mut dch));
        }
        tanh_back(&mut dch, &fwd.critic_h);
        {
            let (w, b) = two(&mut parts, CRITIC1_W, CRITIC1_B);
            dense_back(self.p(CRITIC1_W), &fwd.trunk, &dch, w, b, Some(&mut tmp));
        }
        dtrunk.iter_mut().zip(&tmp).for_each(|(d, t)| *d += t);

        // curve encoder
        let mut dc2 = dtrunk[GRID_EMBED..].to_vec();
        tanh_back(&mut dc2, &fwd.c2);
        let mut dc1 = vec![0.0; CURVE_HIDDEN];
        {
            let (w, b) = two(&mut parts, CURVE2_W, CURVE2_B);
            dense_back(self.p(CURVE2_W), &fwd.c1, &dc2, w, b, Some(&mut dc1));
        }
        tanh_back(&mut dc1, &fwd.c1);
        {
            let (w, b) = two(&mut parts, CURVE1_W, CURVE1_B);
            dense_back(self.p(CURVE1_W), &fwd.input.svec, &dc1, w, b, None);
        }

        // grid encoder
        let mut dh2 = vec![0.0; fwd.h2.len()];
        {
            let (w, b) = two(&mut parts, GRID_W, GRID_B);
            dense_back(self.p(GRID_W), &fwd.h2, &dtrunk[..GRID_EMBED], w, b, Some(&mut dh2));
        }
        dh2.iter_mut().zip(&fwd.h2).for_each(|(d, h)| if *h <= 0.0 { *d = 0.0 });
        let mut dh1 = vec![0.0; fwd.h1.len()];
        {
            let (w, b) = two(&mut parts, CONV2_W, CONV2_B);
            conv3_back(self.p(CONV2_W), &fwd.h1, CONV1_CHANNELS, g - 2, &dh2, w, b, Some(&mut dh1));
        }
        dh1.iter_mut().zip(&fwd.h1).for_each(|(d, h)| if *h <= 0.0 { *d = 0.0 });
        let (w, b) = two(&mut parts, CONV1_W, CONV1_B);
        conv3_back(self.p(CONV1_W), &fwd.input.grid, 1, g, &dh1, w, b, None);
    }
}

/// Mutable weight and bias slices of adjacent blocks `wi` and `bi = wi + 1`.
fn two<'a>(parts: &'a mut [&mut [f64]], wi: usize, bi: usize) -> (&'a mut [f64], &'a mut [f64]) {
    debug_assert_eq!(bi, wi + 1);
    let (a, b) = parts.split_at_mut(bi);
    (&mut *a[wi], &mut *b[0])
}
