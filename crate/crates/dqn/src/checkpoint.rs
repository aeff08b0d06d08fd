//! Versioned binary checkpoint.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size  content
//! 0       8     magic "RPDQNCK\0"
//! 8       4     u32 format version (currently 1)
//! 12      4     u32 header length H
//! 16      H     UTF-8 JSON header (see CheckpointMeta)
//! 16+H    ...   f32 parameters, layer by layer: the fan_in x fan_out weight
//!               matrix in row-major order, then the fan_out biases
//! ```
//!
//! The file must end exactly after the last bias.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::mlp::{Dense, Mlp};
use crate::qnet::QNetwork;
use crate::train::TrainConfig;
use crate::DqnError;

pub const MAGIC: &[u8; 8] = b"RPDQNCK\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    /// Input, hidden and output widths.
    pub layer_sizes: Vec<usize>,
    pub max_rows: u32,
    pub train_config: Option<TrainConfig>,
    /// Row count of the last curriculum stage trained.
    pub stage_rows: Option<u32>,
    pub seed: u64,
}

impl CheckpointMeta {
    pub fn for_network(net: &QNetwork, cfg: Option<&TrainConfig>, stage_rows: Option<u32>) -> Self {
        Self {
            layer_sizes: net.mlp.sizes(),
            max_rows: net.max_rows(),
            train_config: cfg.cloned(),
            stage_rows,
            seed: cfg.map_or(0, |c| c.seed),
        }
    }
}

pub fn write_checkpoint<W: Write>(out: &mut W, net: &QNetwork, meta: &CheckpointMeta) -> Result<(), DqnError> {
    if meta.layer_sizes != net.mlp.sizes() || meta.max_rows != net.max_rows() {
        return Err(DqnError::Checkpoint("metadata does not describe the network".into()));
    }
    let header = serde_json::to_vec(meta)?;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&u32::try_from(header.len()).expect("small header").to_le_bytes())?;
    out.write_all(&header)?;
    for layer in net.mlp.layers() {
        for v in layer.w.iter().chain(layer.b.iter()) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(input: &mut R) -> Result<(QNetwork, CheckpointMeta), DqnError> {
    let bad = |msg: &str| DqnError::Checkpoint(msg.to_string());
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let version = read_u32(input)?;
    if version != VERSION {
        return Err(DqnError::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    let header_len = read_u32(input)? as usize;
    let mut header = vec![0u8; header_len];
    input.read_exact(&mut header)?;
    let meta: CheckpointMeta = serde_json::from_slice(&header)?;
    if meta.layer_sizes.len() < 2 || meta.layer_sizes.contains(&0) {
        return Err(bad("invalid layer sizes"));
    }

    let mut layers = Vec::with_capacity(meta.layer_sizes.len() - 1);
    for s in meta.layer_sizes.windows(2) {
        let w = read_f32s(input, s[0] * s[1])?;
        let b = read_f32s(input, s[1])?;
        layers.push(Dense {
            w: Array2::from_shape_vec((s[0], s[1]), w).expect("sized"),
            b: Array1::from(b),
        });
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes after parameters"));
    }
    let mlp = Mlp::from_layers(layers).ok_or_else(|| bad("layer shapes do not chain"))?;
    Ok((QNetwork::from_mlp(mlp, meta.max_rows)?, meta))
}

pub fn save(path: &Path, net: &QNetwork, meta: &CheckpointMeta) -> Result<(), DqnError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_checkpoint(&mut out, net, meta)?;
    out.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(QNetwork, CheckpointMeta), DqnError> {
    read_checkpoint(&mut BufReader::new(File::open(path)?))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, DqnError> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32s<R: Read>(input: &mut R, n: usize) -> Result<Vec<f32>, DqnError> {
    let mut bytes = vec![0u8; n * 4];
    input.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
