//! Actor-critic loss of one transition and its seeds for the reverse pass.

/// Numerically stable `log softmax`.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    log_softmax(logits).into_iter().map(f64::exp).collect()
}

/// Shannon entropy in nats.
pub fn entropy(logits: &[f64]) -> f64 {
    log_softmax(logits).iter().map(|l| -l.exp() * l).sum()
}

/// `-A log π(a) - β H(π) + ½ (R - V)²`, with the advantage held constant.
pub fn a3c_loss(logits: &[f64], action: usize, advantage: f64, beta: f64, value: f64, ret: f64) -> f64 {
    let lp = log_softmax(logits);
    -advantage * lp[action] - beta * entropy(logits) + 0.5 * (ret - value).powi(2)
}

/// Gradients of [`a3c_loss`] with respect to the logits and the value.
pub fn a3c_seeds(
    logits: &[f64],
    action: usize,
    advantage: f64,
    beta: f64,
    value: f64,
    ret: f64,
) -> (Vec<f64>, f64) {
    let lp = log_softmax(logits);
    let h: f64 = lp.iter().map(|l| -l.exp() * l).sum();
    let d = lp
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let p = l.exp();
            let onehot = if j == action { 1.0 } else { 0.0 };
            -advantage * (onehot - p) + beta * p * (l + h)
        })
        .collect();
    (d, value - ret)
}
