//! JSON model files. Floats are written in shortest round-trip form and parsed exactly,
//! so a save/load cycle reproduces every parameter bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mixture::MaPhlpModel;
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::vectorize::{FeatureOptions, PiConfig};

pub const FORMAT: &str = "phlp-model";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub features: FeatureOptions,
    pub pi: PiConfig,
    pub train: TrainConfig,
    pub model: MaPhlpModel,
}

impl ModelArtifact {
    pub fn new(
        model: MaPhlpModel,
        pi: PiConfig,
        features: FeatureOptions,
        train: TrainConfig,
    ) -> Self {
        Self {
            format: FORMAT.to_string(),
            version: VERSION,
            layer_sizes: model.mlps[0].sizes(),
            features,
            pi,
            train,
            model,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer(&mut out, self)?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let artifact: ModelArtifact = serde_json::from_reader(BufReader::new(file))?;
        if artifact.format != FORMAT || artifact.version != VERSION {
            return Err(Error::invalid(format!(
                "unsupported model file {} v{}",
                artifact.format, artifact.version
            )));
        }
        if artifact
            .model
            .mlps
            .iter()
            .any(|m| m.sizes() != artifact.layer_sizes)
        {
            return Err(Error::invalid(
                "layer sizes disagree with stored parameters",
            ));
        }
        if artifact.layer_sizes[0] != artifact.pi.feature_len() {
            return Err(Error::DimensionMismatch {
                expected: artifact.pi.feature_len(),
                actual: artifact.layer_sizes[0],
            });
        }
        Ok(artifact)
    }
}
