//! Lloyd's algorithm with k-means++ seeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ClusterError;

pub const MAX_ITERATIONS: usize = 500;

/// Outcome of one k-means run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub objective: f64,
    /// Objective after the initial assignment and after every iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, lowest index on ties.
pub fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn check(data: &[Vec<f64>], k: usize) -> Result<(), ClusterError> {
    if data.is_empty() {
        return Err(ClusterError::EmptyDataset);
    }
    if k == 0 || k > data.len() {
        return Err(ClusterError::BadK { k, n: data.len() });
    }
    let dim = data[0].len();
    if data.iter().any(|x| x.len() != dim) {
        return Err(ClusterError::DimensionMismatch {
            expected: dim,
            found: data.iter().map(|x| x.len()).find(|l| *l != dim).unwrap_or(dim),
        });
    }
    Ok(())
}

fn plus_plus(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut centroids = vec![data[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = data.iter().map(|x| sq_dist(x, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, w) in d2.iter().enumerate() {
                acc += w;
                if r < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(data[pick].clone());
        for (d, x) in d2.iter_mut().zip(data) {
            *d = d.min(sq_dist(x, &data[pick]));
        }
    }
    centroids
}

fn assign_all(data: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut j = 0.0;
    let a = data
        .iter()
        .map(|x| {
            let (i, d) = nearest(centroids, x);
            j += d;
            i
        })
        .collect();
    (a, j)
}

/// One k-means run seeded by `seed`.
pub fn kmeans(data: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansFit, ClusterError> {
    check(data, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(lloyd(data, k, &mut rng))
}

/// Best of `restarts` runs sharing one random stream; earliest wins ties.
pub fn kmeans_restarts(
    data: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<KMeansFit, ClusterError> {
    check(data, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = lloyd(data, k, &mut rng);
    for _ in 1..restarts {
        let fit = lloyd(data, k, &mut rng);
        if fit.objective < best.objective {
            best = fit;
        }
    }
    Ok(best)
}

fn lloyd(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> KMeansFit {
    let dim = data[0].len();
    let mut centroids = plus_plus(data, k, rng);
    let (mut assignments, mut objective) = assign_all(data, &centroids);
    let mut history = vec![objective];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (x, &a) in data.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(x) {
                *s += v;
            }
        }
        // farthest-sample re-seeding for clusters left empty
        let mut dist: Vec<f64> = data
            .iter()
            .zip(&assignments)
            .map(|(x, &a)| sq_dist(x, &centroids[a]))
            .collect();
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..data.len())
                    .fold(0, |best, i| if dist[i] > dist[best] { i } else { best });
                centroids[c] = data[far].clone();
                dist[far] = 0.0;
            } else {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let (next, j) = assign_all(data, &centroids);
        history.push(j);
        objective = j;
        if next == assignments {
            break;
        }
        assignments = next;
    }
    KMeansFit {
        centroids,
        assignments,
        objective,
        history,
        iterations,
    }
}
