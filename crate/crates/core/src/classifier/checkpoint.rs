//! JSON checkpoints.
//!
//! Weights are written as nested row-major arrays using the shortest
//! round-tripping decimal form, so a save/load cycle is bit-exact.

use std::io::{Read, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::mlp::{Architecture, Layer, Mlp};
use super::Classifier;
use crate::dataset::ScalingSpec;
use crate::error::{Error, Result};
use crate::simulators::Problem;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    weight: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format_version: u32,
    architecture: Architecture,
    layers: Vec<LayerFile>,
    scaling: ScalingSpec,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    problem: Option<Problem>,
}

impl Classifier {
    pub fn write_checkpoint(&self, mut out: impl Write) -> Result<()> {
        let file = CheckpointFile {
            format_version: CHECKPOINT_FORMAT_VERSION,
            architecture: self.net.arch.clone(),
            layers: self
                .net
                .layers
                .iter()
                .map(|l| LayerFile {
                    weight: l.weight.outer_iter().map(|r| r.to_vec()).collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
            scaling: self.scaling.clone(),
            seed: self.seed,
            problem: self.problem,
        };
        serde_json::to_writer(&mut out, &file).map_err(|e| Error::Checkpoint(e.to_string()))?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_checkpoint(mut input: impl Read) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let file: CheckpointFile = serde_json::from_str(&text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        if file.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format_version {} (expected {CHECKPOINT_FORMAT_VERSION})",
                file.format_version
            )));
        }
        let layers = file
            .layers
            .into_iter()
            .map(|l| {
                let rows = l.weight.len();
                let cols = l.weight.first().map_or(0, Vec::len);
                if l.weight.iter().any(|r| r.len() != cols) {
                    return Err(Error::Checkpoint("ragged weight matrix".into()));
                }
                let flat: Vec<f64> = l.weight.into_iter().flatten().collect();
                Ok(Layer {
                    weight: Array2::from_shape_vec((rows, cols), flat).map_err(|e| Error::Checkpoint(e.to_string()))?,
                    bias: Array1::from(l.bias),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let net = Mlp {
            arch: file.architecture,
            layers,
        };
        net.check_shapes().map_err(|e| Error::Checkpoint(e.to_string()))?;
        if !net.is_finite() {
            return Err(Error::Checkpoint("non-finite parameter".into()));
        }
        if file.scaling.dim() != net.arch.input_dim - 1 || file.scaling.theta_upper.len() != file.scaling.dim() {
            return Err(Error::Checkpoint("scaling dimension does not match the network input".into()));
        }
        Ok(Classifier {
            net,
            scaling: file.scaling,
            seed: file.seed,
            problem: file.problem,
        })
    }
}
