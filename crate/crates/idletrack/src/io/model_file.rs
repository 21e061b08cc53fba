//! Idle model file: TOML with full-precision coefficients.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idle::{IdleConfig, IdleModel, MachineState, MadVariant};

pub const MODEL_VERSION: u32 = 1;

/// On-disk form of a model plus the windowing it was fitted for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub positive_label: MachineState,
    pub mad_variant: MadVariant,
    pub capacity: usize,
    pub fps: f64,
}

impl ModelFile {
    pub fn new(model: &IdleModel, config: &IdleConfig) -> Self {
        ModelFile {
            version: MODEL_VERSION,
            beta0: model.beta0,
            beta1: model.beta1,
            beta2: model.beta2,
            positive_label: model.positive_label,
            mad_variant: config.mad_variant,
            capacity: config.capacity,
            fps: config.fps,
        }
    }

    pub fn into_parts(self) -> Result<(IdleModel, IdleConfig)> {
        let model = IdleModel {
            beta0: self.beta0,
            beta1: self.beta1,
            beta2: self.beta2,
            positive_label: self.positive_label,
        };
        model.validate()?;
        let config = IdleConfig {
            capacity: self.capacity,
            fps: self.fps,
            mad_variant: self.mad_variant,
        };
        config.validate()?;
        Ok((model, config))
    }
}

pub fn read_model_str(text: &str) -> Result<(IdleModel, IdleConfig)> {
    let file: ModelFile = toml::from_str(text)
        .map_err(|e| Error::invalid("model file", e.to_string()))?;
    if file.version != MODEL_VERSION {
        return Err(Error::VersionMismatch {
            format: "model",
            found: file.version,
            expected: MODEL_VERSION,
        });
    }
    file.into_parts()
}

pub fn read_model(path: impl AsRef<Path>) -> Result<(IdleModel, IdleConfig)> {
    read_model_str(&fs::read_to_string(path)?)
}

pub fn write_model(path: impl AsRef<Path>, model: &IdleModel, config: &IdleConfig) -> Result<()> {
    let file = ModelFile::new(model, config);
    let text = toml::to_string(&file).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}
