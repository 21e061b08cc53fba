//! Pipeline configuration file: tracker, idle and evaluation settings.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idle::MadVariant;
use crate::tracker::TrackerConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdleSection {
    /// Observations per idle window.
    pub capacity: usize,
    /// Nominal stream FPS used for window arithmetic.
    pub fps: f64,
    pub mad_variant: MadVariant,
    /// Optional model file; the built-in coefficients apply otherwise.
    pub model: Option<PathBuf>,
}

impl Default for IdleSection {
    fn default() -> Self {
        IdleSection { capacity: 15, fps: 10.0, mad_variant: MadVariant::AsPrinted, model: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// IoU at or above which a tracked box matches ground truth.
    pub iou_match: f64,
    /// Idle-motion threshold for oracle labels, px/frame.
    pub eps_v: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { iou_match: 0.5, eps_v: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub tracker: TrackerConfig,
    pub idle: IdleSection,
    pub eval: EvalConfig,
    /// Optional scenario file this config pairs with.
    pub scenario: Option<PathBuf>,
}

pub fn read_config_str(text: &str) -> Result<PipelineConfig> {
    let mut table: toml::Table =
        toml::from_str(text).map_err(|e| Error::invalid("pipeline config", e.to_string()))?;
    super::scenario::check_version(&mut table, "config", CONFIG_VERSION)?;
    let config: PipelineConfig = serde_path_to_error::deserialize(toml::Value::Table(table))
        .map_err(|e| Error::invalid("pipeline config", format!("{}: {}", e.path(), e.inner())))?;
    config.tracker.validate()?;
    if config.idle.capacity < 2 {
        return Err(Error::invalid("pipeline config", "idle.capacity must be >= 2"));
    }
    if !(config.idle.fps.is_finite() && config.idle.fps > 0.0) {
        return Err(Error::invalid("pipeline config", "idle.fps must be > 0"));
    }
    if !(0.0..=1.0).contains(&config.eval.iou_match) {
        return Err(Error::invalid("pipeline config", "eval.iou_match must be in [0,1]"));
    }
    Ok(config)
}

pub fn read_config(path: impl AsRef<Path>) -> Result<PipelineConfig> {
    read_config_str(&fs::read_to_string(path)?)
}

pub fn write_config(path: impl AsRef<Path>, config: &PipelineConfig) -> Result<()> {
    let body = toml::to_string(config).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(path, format!("version = {CONFIG_VERSION}\n{body}"))?;
    Ok(())
}
