//! Differential S-parameter datasets and typical action clusters.
//!
//! Every accepted vertex action at every perturbation magnitude yields a
//! feature vector: the baseline dB curves minus the perturbed ones. k-means
//! groups these into clusters; the cluster with negligible mean effect is
//! dropped from the action alphabet.

mod kmeans;
mod report;

pub use kmeans::{kmeans, kmeans_restarts, nearest, sq_dist, KMeansFit, MAX_ITERATIONS};
pub use report::{cluster_report, read_dataset_csv, write_dataset_csv, ClusterReport, ReportRow};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{Direction, MeshError, MeshModel, VertexAction};
use crate::sparams::{db_mag, SParamSweep};
use crate::surrogate::{Surrogate, SurrogateError};

/// Default negligible-effect ratio.
pub const DEFAULT_TAU: f64 = 0.05;

/// k-means++ restarts per fit; the lowest objective is kept.
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("empty sample list")]
    EmptyDataset,
    #[error("k = {k} is not in 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("feature length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no effective actions")]
    NoEffectiveActions,
    #[error("tau must lie in (0, 1), got {0}")]
    BadTau(f64),
    #[error("no perturbation magnitudes given")]
    NoDeltas,
    #[error("solver failed on vertex {vertex} {direction} by {delta_mm} mm: {source}")]
    Solver {
        vertex: usize,
        direction: Direction,
        delta_mm: f64,
        source: SurrogateError,
    },
    #[error("seed mesh: {0}")]
    Seed(String),
    #[error("unknown cluster {0}")]
    UnknownCluster(usize),
    #[error("dataset file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSample {
    pub action: VertexAction,
    pub feature: Vec<f64>,
}

/// Samples plus the bookkeeping needed to interpret them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<PerturbationSample>,
    pub rejected: usize,
    pub frequencies: Vec<f64>,
    pub one_port: bool,
}

/// `base - perturbed` of dB(s11), followed by dB(s21) for two-ports.
pub fn differential_feature(base: &SParamSweep, perturbed: &SParamSweep, one_port: bool) -> Vec<f64> {
    let mut f: Vec<f64> = base
        .points()
        .iter()
        .zip(perturbed.points())
        .map(|(a, b)| db_mag(a.s11) - db_mag(b.s11))
        .collect();
    if !one_port {
        f.extend(
            base.points()
                .iter()
                .zip(perturbed.points())
                .map(|(a, b)| db_mag(a.s21) - db_mag(b.s21)),
        );
    }
    f
}

/// One sample per accepted (vertex, direction, delta); rejected geometries
/// are skipped and counted.
pub fn gen_perturbation_dataset(
    mesh: &MeshModel,
    surrogate: &Surrogate,
    deltas_mm: &[f64],
    freqs: &[f64],
) -> Result<Dataset, ClusterError> {
    if deltas_mm.is_empty() {
        return Err(ClusterError::NoDeltas);
    }
    let one_port = surrogate.kind.is_one_port();
    let base = surrogate
        .simulate(mesh, freqs)
        .map_err(|e| ClusterError::Seed(e.to_string()))?;
    let mut samples = Vec::new();
    let mut rejected = 0;
    for (vertex, direction) in mesh.vertex_action_space() {
        for &delta in deltas_mm {
            let action = VertexAction::new(vertex, direction, delta)
                .map_err(|e| ClusterError::Seed(e.to_string()))?;
            let moved = match mesh.apply_action(&action) {
                Ok(m) => m,
                Err(MeshError::Rejected(_)) => {
                    rejected += 1;
                    continue;
                }
                Err(e) => return Err(ClusterError::Seed(e.to_string())),
            };
            let sweep = surrogate.simulate(&moved, freqs).map_err(|source| ClusterError::Solver {
                vertex,
                direction,
                delta_mm: delta,
                source,
            })?;
            samples.push(PerturbationSample {
                action,
                feature: differential_feature(&base, &sweep, one_port),
            });
        }
    }
    Ok(Dataset {
        samples,
        rejected,
        frequencies: freqs.to_vec(),
        one_port,
    })
}

/// Fitted clusters over a perturbation dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionClusterModel {
    pub k: usize,
    pub seed: u64,
    pub tau: f64,
    pub frequencies: Vec<f64>,
    pub one_port: bool,
    pub centroids: Vec<Vec<f64>>,
    pub actions: Vec<VertexAction>,
    pub assignments: Vec<usize>,
    /// Mean feature norm of each cluster's members.
    pub effect: Vec<f64>,
    pub negligible: Vec<bool>,
    pub objective: f64,
    pub objective_history: Vec<f64>,
}

impl ActionClusterModel {
    /// Clusters the dataset (best of [`DEFAULT_RESTARTS`] runs) and flags
    /// negligible clusters at `tau`.
    pub fn fit(dataset: &Dataset, k: usize, seed: u64, tau: f64) -> Result<Self, ClusterError> {
        let features: Vec<Vec<f64>> = dataset.samples.iter().map(|s| s.feature.clone()).collect();
        let fit = kmeans_restarts(&features, k, seed, DEFAULT_RESTARTS)?;
        let mut effect = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (f, &a) in features.iter().zip(&fit.assignments) {
            effect[a] += f.iter().map(|v| v * v).sum::<f64>().sqrt();
            counts[a] += 1;
        }
        for (e, c) in effect.iter_mut().zip(&counts) {
            if *c > 0 {
                *e /= *c as f64;
            }
        }
        let model = Self {
            k,
            seed,
            tau,
            frequencies: dataset.frequencies.clone(),
            one_port: dataset.one_port,
            centroids: fit.centroids,
            actions: dataset.samples.iter().map(|s| s.action).collect(),
            assignments: fit.assignments,
            effect,
            negligible: vec![false; k],
            objective: fit.objective,
            objective_history: fit.history,
        };
        prune_negligible(model, tau)
    }

    /// Ids of clusters kept in the action alphabet, ascending.
    pub fn effective_clusters(&self) -> Vec<usize> {
        (0..self.k).filter(|c| !self.negligible[*c]).collect()
    }

    /// Distinct (vertex, direction) pairs assigned to `cluster`, sorted.
    pub fn members(&self, cluster: usize) -> Result<Vec<(usize, Direction)>, ClusterError> {
        if cluster >= self.k {
            return Err(ClusterError::UnknownCluster(cluster));
        }
        let set: BTreeSet<(usize, Direction)> = self
            .actions
            .iter()
            .zip(&self.assignments)
            .filter(|(_, a)| **a == cluster)
            .map(|(act, _)| (act.vertex, act.direction))
            .collect();
        Ok(set.into_iter().collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cluster model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClusterError> {
        serde_json::from_str(text).map_err(|e| ClusterError::Format(e.to_string()))
    }
}

/// Flags clusters whose effect is below `tau` times the largest effect.
pub fn prune_negligible(mut model: ActionClusterModel, tau: f64) -> Result<ActionClusterModel, ClusterError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(ClusterError::BadTau(tau));
    }
    let max = model.effect.iter().copied().fold(0.0, f64::max);
    model.tau = tau;
    model.negligible = model.effect.iter().map(|e| !(*e >= tau * max) || max == 0.0).collect();
    if model.negligible.iter().all(|n| *n) {
        return Err(ClusterError::NoEffectiveActions);
    }
    Ok(model)
}

/// Nearest-centroid cluster of a feature vector, lowest id on ties.
pub fn assign(model: &ActionClusterModel, feature: &[f64]) -> Result<usize, ClusterError> {
    let dim = model.centroids.first().map_or(0, |c| c.len());
    if feature.len() != dim {
        return Err(ClusterError::DimensionMismatch {
            expected: dim,
            found: feature.len(),
        });
    }
    Ok(nearest(&model.centroids, feature).0)
}
