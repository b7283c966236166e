use serde::{Deserialize, Serialize};

use super::{NnError, PolicyValueNet};

/// RMSProp with global gradient-norm clipping:
/// `s ← ρ s + (1-ρ) g²`, `θ ← θ - η g / √(s + ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsProp {
    pub lr: f64,
    pub decay: f64,
    pub eps: f64,
    pub clip_norm: f64,
    pub square_avg: Vec<f64>,
}

impl RmsProp {
    pub fn new(param_count: usize, lr: f64) -> Self {
        Self {
            lr,
            decay: 0.99,
            eps: 1e-5,
            clip_norm: 40.0,
            square_avg: vec![0.0; param_count],
        }
    }

    /// Clipping factor for a gradient of the given norm.
    pub fn clip_scale(&self, norm: f64) -> f64 {
        if norm > self.clip_norm {
            self.clip_norm / norm
        } else {
            1.0
        }
    }

    /// Applies one update and returns the gradient norm before clipping.
    pub fn step(&mut self, net: &mut PolicyValueNet, grads: &[f64]) -> Result<f64, NnError> {
        if grads.len() != net.params().len() || self.square_avg.len() != grads.len() {
            return Err(NnError::DimensionMismatch {
                what: "gradients",
                expected: net.params().len(),
                found: grads.len(),
            });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(NnError::Diverged(net.block_of(i).to_string()));
        }
        let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
        let scale = self.clip_scale(norm);
        let (rho, lr, eps) = (self.decay, self.lr, self.eps);
        for ((p, s), &g) in net.params_mut().iter_mut().zip(&mut self.square_avg).zip(grads) {
            let g = g * scale;
            *s = rho * *s + (1.0 - rho) * g * g;
            *p -= lr * g / (*s + eps).sqrt();
        }
        Ok(norm)
    }
}
