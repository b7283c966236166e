//! Run configuration: JSON file, dotted overrides, then seed.

use std::path::{Path, PathBuf};

use mwdesign_core::mesh::MeshModel;
use mwdesign_core::rl::{DesignTask, RewardWeights, TrainConfig};
use mwdesign_core::surrogate::{Material, Surrogate};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusteringConfig {
    pub k: usize,
    pub deltas_mm: Vec<f64>,
    pub tau: f64,
    pub seed: u64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            k: 5,
            deltas_mm: vec![0.05, 0.1, 0.15],
            tau: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: DesignTask,
    /// Mesh JSON, relative to the config file.
    pub mesh: PathBuf,
    #[serde(default)]
    pub material: Material,
    #[serde(default)]
    pub clustering: ClusteringConfig,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub reward: RewardWeights,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_checkpoint_every() -> u64 {
    1000
}

/// A config with its mesh loaded and the output directory resolved.
pub struct Loaded {
    pub config: RunConfig,
    pub mesh: MeshModel,
    pub mesh_sha256: String,
    pub out: Option<PathBuf>,
}

impl Loaded {
    pub fn surrogate(&self) -> Surrogate {
        Surrogate::new(self.config.task.kind, self.config.material)
    }

    /// Config as recorded in manifests; the output location is left out so
    /// that reruns elsewhere produce identical bytes.
    pub fn resolved(&self) -> Value {
        let mut c = self.config.clone();
        c.out = None;
        serde_json::to_value(&c).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        hex(&Sha256::digest(serde_json::to_vec(&self.resolved()).expect("json")))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Sets `a.b.c = value` inside `root`, creating objects on the way.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("override `{assignment}` is not key=value")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::usage(format!("bad override key `{key}`")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::usage(format!("override `{key}`: `{}` is not an object", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!()
}

pub fn load(path: &Path, overrides: &[String], seed: Option<u64>, out: Option<&Path>) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut raw: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    for o in overrides {
        apply_override(&mut raw, o)?;
    }
    let mut config: RunConfig =
        serde_json::from_value(raw).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    if let Some(s) = seed {
        config.clustering.seed = s;
        config.training.seed = s;
    }
    config.task.validate()?;
    config.training.validate()?;
    config.reward.validate()?;
    if config.checkpoint_every == 0 {
        return Err(CliError::usage("checkpoint_every must be at least 1"));
    }

    let base = path.parent().unwrap_or(Path::new(""));
    let mesh_path = base.join(&config.mesh);
    let mesh_text = std::fs::read_to_string(&mesh_path)
        .map_err(|e| CliError::usage(format!("cannot read mesh file {}: {e}", mesh_path.display())))?;
    let mesh = MeshModel::from_json(&mesh_text)
        .map_err(|e| CliError::usage(format!("mesh file {}: {e}", mesh_path.display())))?;
    let violations = mesh.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(CliError::usage(format!(
            "mesh file {} is invalid:\n{}",
            mesh_path.display(),
            list.join("\n")
        )));
    }
    let out = out
        .map(Path::to_path_buf)
        .or_else(|| config.out.as_ref().map(|o| base.join(o)));
    Ok(Loaded {
        config,
        mesh,
        mesh_sha256: hex(&Sha256::digest(mesh_text.as_bytes())),
        out,
    })
}
