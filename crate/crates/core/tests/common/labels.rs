//! Ground-truth action labels read off the surrogate parameter maps.

use mwdesign_core::clustering::ActionClusterModel;
use mwdesign_core::mesh::MeshModel;
use mwdesign_core::surrogate::{CircuitKind, Surrogate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    /// Only resonant length changes (filter resonators or the patch).
    Length,
    /// Filters: only the gap coupling changes. Patches: only the feed.
    Other,
}

/// Label of every sample in `model`, `None` when the action moves more than
/// one parameter family (or none).
pub fn labels(model: &ActionClusterModel, mesh: &MeshModel, surrogate: &Surrogate) -> Vec<Option<Label>> {
    let base = surrogate.parameters(mesh).unwrap();
    model
        .actions
        .iter()
        .map(|a| {
            let moved = surrogate.parameters(&mesh.apply_action(a).unwrap()).unwrap();
            let changed = |name: &str| {
                let (b, m) = (
                    base.iter().find(|p| p.0 == name).unwrap().1,
                    moved.iter().find(|p| p.0 == name).unwrap().1,
                );
                (b - m).abs() > 1e-12 * b.abs().max(1.0)
            };
            match surrogate.kind {
                CircuitKind::Filter => {
                    let len = changed("f1") || changed("f2");
                    let gap = changed("m1");
                    match (len, gap) {
                        (true, false) => Some(Label::Length),
                        (false, true) => Some(Label::Other),
                        _ => None,
                    }
                }
                CircuitKind::Antenna => {
                    let feed = ["feed_width", "feed_length", "feed_offset"].iter().any(|n| changed(n));
                    if changed("length") {
                        Some(Label::Length)
                    } else if feed {
                        Some(Label::Other)
                    } else {
                        None
                    }
                }
                CircuitKind::Line => None,
            }
        })
        .collect()
}

/// Fraction of labelled samples that share their cluster's majority label.
pub fn purity(model: &ActionClusterModel, labels: &[Option<Label>]) -> f64 {
    let mut counts = vec![[0usize; 2]; model.k];
    for (&c, l) in model.assignments.iter().zip(labels) {
        match l {
            Some(Label::Length) => counts[c][0] += 1,
            Some(Label::Other) => counts[c][1] += 1,
            None => {}
        }
    }
    let total: usize = counts.iter().map(|c| c[0] + c[1]).sum();
    counts.iter().map(|c| c[0].max(c[1])).sum::<usize>() as f64 / total as f64
}
