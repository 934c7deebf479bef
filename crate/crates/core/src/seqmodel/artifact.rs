//! Model files.
//!
//! Layout, version 1:
//!
//! ```text
//! b"SPDM1" | u32 LE header length | JSON header | f64 LE tensor data
//! ```
//!
//! The header holds the training config, label order, vocabulary, sequence
//! length and a manifest of `(name, rows, cols)` tensors stored back to back
//! in manifest order. Raw little-endian doubles make round trips bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::ModelParams;
use super::{Direction, TrainConfig};
use crate::error::{Error, Result};
use crate::features::Vocabulary;

pub const ARTIFACT_MAGIC: &[u8; 5] = b"SPDM1";
const FORMAT_VERSION: u32 = 1;

/// A trained model with everything needed to run it on new text.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub config: TrainConfig,
    pub labels: Vec<String>,
    pub vocab: Vocabulary,
    pub max_len: usize,
    pub model: ModelParams,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    config: TrainConfig,
    labels: Vec<String>,
    vocab: Vocabulary,
    max_len: usize,
    direction: Direction,
    vocab_size: usize,
    embed_dim: usize,
    hidden: usize,
    num_classes: usize,
    tensors: Vec<TensorEntry>,
}

impl ModelArtifact {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let m = &self.model;
        if self.labels.len() != m.num_classes {
            return Err(Error::DimensionMismatch {
                expected: m.num_classes,
                found: self.labels.len(),
            });
        }
        let header = Header {
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
            labels: self.labels.clone(),
            vocab: self.vocab.clone(),
            max_len: self.max_len,
            direction: m.direction,
            vocab_size: m.vocab_size,
            embed_dim: m.embed_dim,
            hidden: m.hidden,
            num_classes: m.num_classes,
            tensors: m
                .tensor_specs()
                .into_iter()
                .map(|(name, rows, cols)| TensorEntry { name, rows, cols })
                .collect(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Artifact(e.to_string()))?;
        let len = u32::try_from(json.len()).map_err(|_| Error::Artifact("header too large".into()))?;
        let mut out = Vec::with_capacity(9 + json.len() + m.num_params() * 8);
        out.extend_from_slice(ARTIFACT_MAGIC);
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&json);
        for t in m.tensors() {
            for v in t {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Artifact(msg.to_owned());
        if bytes.len() < 9 || &bytes[..5] != ARTIFACT_MAGIC {
            return Err(bad("missing SPDM1 magic"));
        }
        let len = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
        let json = bytes.get(9..9 + len).ok_or_else(|| bad("truncated header"))?;
        let header: Header = serde_json::from_slice(json).map_err(|e| Error::Artifact(e.to_string()))?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::Artifact(format!(
                "unsupported format version {}",
                header.format_version
            )));
        }
        let mut model = ModelParams::zeros(
            header.direction,
            header.vocab_size,
            header.embed_dim,
            header.hidden,
            header.num_classes,
        );
        let expected: Vec<(String, usize, usize)> = model.tensor_specs();
        let found: Vec<(String, usize, usize)> = header
            .tensors
            .iter()
            .map(|t| (t.name.clone(), t.rows, t.cols))
            .collect();
        if expected != found {
            return Err(bad("tensor manifest does not match the declared shapes"));
        }
        let mut data = &bytes[9 + len..];
        for t in model.tensors_mut() {
            let need = t.len() * 8;
            if data.len() < need {
                return Err(bad("truncated tensor data"));
            }
            for (v, chunk) in t.iter_mut().zip(data[..need].chunks_exact(8)) {
                *v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
            }
            data = &data[need..];
        }
        if !data.is_empty() {
            return Err(bad("trailing bytes after tensor data"));
        }
        if header.labels.len() != header.num_classes
            || header.vocab.sequence_vocab_size() != header.vocab_size
        {
            return Err(bad("labels or vocabulary disagree with the model shape"));
        }
        Ok(Self {
            config: header.config,
            labels: header.labels,
            vocab: header.vocab,
            max_len: header.max_len,
            model,
        })
    }
}

pub fn save_model(artifact: &ModelArtifact, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, artifact.to_bytes()?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelArtifact> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    ModelArtifact::from_bytes(&bytes)
}
