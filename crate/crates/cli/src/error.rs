use std::path::Path;

use mwdesign_core::clustering::ClusterError;
use mwdesign_core::mesh::MeshError;
use mwdesign_core::nn::NnError;
use mwdesign_core::rl::RlError;
use mwdesign_core::sparams::SParamError;
use mwdesign_core::surrogate::SurrogateError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("numerical divergence: {0}")]
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Diverged(_) => 4,
        }
    }

    pub fn io(path: &Path, e: impl ToString) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<RlError> for CliError {
    fn from(e: RlError) -> Self {
        match e {
            RlError::Diverged(m) => CliError::Diverged(m),
            RlError::Net(n) => n.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::Diverged(m) => CliError::Diverged(m),
            NnError::Io(io) => CliError::Io {
                path: "checkpoint".into(),
                msg: io.to_string(),
            },
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SurrogateError> for CliError {
    fn from(e: SurrogateError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SParamError> for CliError {
    fn from(e: SParamError) -> Self {
        match e {
            SParamError::Io(m) => CliError::Io {
                path: "sweep".into(),
                msg: m,
            },
            other => CliError::Usage(other.to_string()),
        }
    }
}
