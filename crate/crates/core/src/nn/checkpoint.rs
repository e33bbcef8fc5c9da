//! Self-describing JSON checkpoints: a manifest plus named parameter tensors.
//! Floats are written in shortest round-trip decimal form, so files are
//! byte-order independent and reload bit-exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AdamConfig, AdamState, EpochRecord, Matrix, Parameters};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl NamedTensor {
    pub fn capture(name: &str, m: &Matrix) -> Self {
        NamedTensor {
            name: name.to_string(),
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().to_vec(),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix> {
        Matrix::from_vec(self.rows, self.cols, self.data.clone())
            .map_err(|e| Error::Checkpoint(format!("tensor {}: {e}", self.name)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSnapshot {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: Vec<NamedTensor>,
    pub second_moment: Vec<NamedTensor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    /// `"char_nlm"` or `"seq2seq"`.
    pub kind: String,
    /// Source label used in run-file config ids, e.g. `"AOL"`.
    pub source: Option<String>,
    pub seed: u64,
    pub dims: BTreeMap<String, usize>,
    pub hyperparameters: serde_json::Value,
    /// Symbols in index order, reserved symbols included.
    pub vocabulary: Vec<String>,
    pub tensors: Vec<NamedTensor>,
    pub optimizer: Option<OptimizerSnapshot>,
    pub training_log: Vec<EpochRecord>,
}

pub fn capture_tensors<P: Parameters>(params: &P) -> Vec<NamedTensor> {
    params
        .tensors()
        .into_iter()
        .map(|(n, t)| NamedTensor::capture(&n, t))
        .collect()
}

/// Copies `saved` into `params`, matching by name and shape.
pub fn restore_tensors<P: Parameters>(params: &mut P, saved: &[NamedTensor]) -> Result<()> {
    let names: Vec<(String, (usize, usize))> = params.tensors().into_iter().map(|(n, t)| (n, t.shape())).collect();
    if names.len() != saved.len() {
        return Err(Error::Checkpoint(format!(
            "expected {} tensors, found {}",
            names.len(),
            saved.len()
        )));
    }
    let by_name: BTreeMap<&str, &NamedTensor> = saved.iter().map(|t| (t.name.as_str(), t)).collect();
    for ((name, shape), dst) in names.iter().zip(params.tensors_mut()) {
        let src = by_name
            .get(name.as_str())
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))?;
        if (src.rows, src.cols) != *shape {
            return Err(Error::Checkpoint(format!(
                "tensor {name}: saved shape {}x{}, model expects {}x{}",
                src.rows, src.cols, shape.0, shape.1
            )));
        }
        *dst = src.to_matrix()?;
    }
    Ok(())
}

pub fn capture_optimizer<P: Parameters>(adam: &AdamState, params: &P) -> OptimizerSnapshot {
    let names: Vec<String> = params.tensors().into_iter().map(|(n, _)| n).collect();
    let snap = |ms: &[Matrix]| names.iter().zip(ms).map(|(n, m)| NamedTensor::capture(n, m)).collect();
    OptimizerSnapshot {
        config: *adam.config(),
        step: adam.steps_taken(),
        first_moment: snap(adam.first_moments()),
        second_moment: snap(adam.second_moments()),
    }
}

pub fn restore_optimizer<P: Parameters>(snap: &OptimizerSnapshot, params: &P) -> Result<AdamState> {
    let load = |ts: &[NamedTensor]| ts.iter().map(NamedTensor::to_matrix).collect::<Result<Vec<_>>>();
    AdamState::from_parts(
        snap.config,
        snap.step,
        load(&snap.first_moment)?,
        load(&snap.second_moment)?,
        params,
    )
    .map_err(|e| Error::Checkpoint(format!("optimizer state: {e}")))
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn read_from<R: Read>(reader: R) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_reader(reader).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if ckpt.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                ckpt.format_version
            )));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    pub fn dim(&self, name: &str) -> Result<usize> {
        self.dims
            .get(name)
            .copied()
            .ok_or_else(|| Error::Checkpoint(format!("manifest lacks dimension {name}")))
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::Checkpoint(format!(
                "expected a {kind} checkpoint, found {}",
                self.kind
            )))
        }
    }
}
