use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::PolicyValueNet;

/// `rows × cols` matrix with orthonormal rows (rows ≤ cols) or orthonormal
/// columns (rows > cols), scaled by `gain`.
pub fn orthogonal(rows: usize, cols: usize, gain: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (n, m) = (rows.min(cols), rows.max(cols));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        // modified Gram-Schmidt, twice for stability
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    let mut w = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            w[r * cols + c] = gain * if rows <= cols { basis[r][c] } else { basis[c][r] };
        }
    }
    w
}

pub fn orthogonal_init(net: &mut PolicyValueNet, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let relu = 2f64.sqrt();
    let blocks = net.blocks().to_vec();
    for b in blocks {
        if !b.name.ends_with(".w") {
            continue;
        }
        let gain = match b.name.as_str() {
            "conv1.w" | "conv2.w" => relu,
            "actor_fc2.w" | "critic_fc2.w" => 0.01,
            _ => 1.0,
        };
        let rows = b.shape[0];
        let cols = b.len / rows;
        let w = orthogonal(rows, cols, gain, &mut rng);
        net.params_mut()[b.offset..b.offset + b.len].copy_from_slice(&w);
    }
}
