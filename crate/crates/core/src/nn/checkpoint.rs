//! Binary parameter checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! b"MWDP"            magic
//! u32                format version
//! u32                header length in bytes
//! header             UTF-8 JSON: network config, block names and shapes,
//!                    optimizer hyperparameters (or null), step counters
//! f64 × P            parameters in block order
//! f64 × P            optimizer square averages, only if optimizer is non-null
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NetConfig, NnError, PolicyValueNet, RmsProp};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"MWDP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub net: PolicyValueNet,
    pub optimizer: Option<RmsProp>,
    pub global_step: u64,
    pub episode: u64,
}

#[derive(Serialize, Deserialize)]
struct BlockShape {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct OptimizerHeader {
    lr: f64,
    decay: f64,
    eps: f64,
    clip_norm: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    config: NetConfig,
    blocks: Vec<BlockShape>,
    optimizer: Option<OptimizerHeader>,
    global_step: u64,
    episode: u64,
}

pub fn write_checkpoint<W: Write>(ck: &Checkpoint, mut w: W) -> Result<(), NnError> {
    let header = Header {
        config: *ck.net.config(),
        blocks: ck
            .net
            .blocks()
            .iter()
            .map(|b| BlockShape {
                name: b.name.clone(),
                shape: b.shape.clone(),
            })
            .collect(),
        optimizer: ck.optimizer.as_ref().map(|o| OptimizerHeader {
            lr: o.lr,
            decay: o.decay,
            eps: o.eps,
            clip_norm: o.clip_norm,
        }),
        global_step: ck.global_step,
        episode: ck.episode,
    };
    let json = serde_json::to_vec(&header).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    for v in ck.net.params() {
        w.write_all(&v.to_le_bytes())?;
    }
    if let Some(o) = &ck.optimizer {
        for v in &o.square_avg {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NnError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>, NnError> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)
        .map_err(|_| NnError::Checkpoint("truncated parameter data".into()))?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint, NnError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| NnError::Checkpoint("file too short".into()))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(NnError::Checkpoint("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {version}")));
    }
    let len = read_u32(&mut r)? as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json).map_err(|e| NnError::Checkpoint(e.to_string()))?;
    let net = PolicyValueNet::zeros(header.config)?;
    let matches = net.blocks().len() == header.blocks.len()
        && net
            .blocks()
            .iter()
            .zip(&header.blocks)
            .all(|(a, b)| a.name == b.name && a.shape == b.shape);
    if !matches {
        return Err(NnError::Checkpoint("block layout does not match the network".into()));
    }
    let n = net.params().len();
    let net = PolicyValueNet::from_params(header.config, read_f64s(&mut r, n)?)?;
    let optimizer = match header.optimizer {
        Some(o) => Some(RmsProp {
            lr: o.lr,
            decay: o.decay,
            eps: o.eps,
            clip_norm: o.clip_norm,
            square_avg: read_f64s(&mut r, n)?,
        }),
        None => None,
    };
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(NnError::Checkpoint("trailing bytes".into()));
    }
    Ok(Checkpoint {
        net,
        optimizer,
        global_step: header.global_step,
        episode: header.episode,
    })
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<(), NnError> {
    write_checkpoint(ck, BufWriter::new(File::create(path)?))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, NnError> {
    read_checkpoint(BufReader::new(File::open(path)?))
}
