//! Window features over tracked boxes and the idle/active classifier.
//!
//! Per track, areas and centroids accumulate in a tumbling buffer. When
//! the buffer fills, consecutive differences of area (AD) and centroid
//! (CD) are reduced to one variability statistic each — the mean absolute
//! deviation about the series median — and a logistic model turns the
//! pair into an idle/active verdict. The buffer is then cleared, so each
//! verdict covers a disjoint window of observations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bbox::BBox;
use crate::detection::TrackId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MachineState {
    Idle,
    Active,
}

impl MachineState {
    pub fn other(self) -> Self {
        match self {
            MachineState::Idle => MachineState::Active,
            MachineState::Active => MachineState::Idle,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MachineState::Idle => "idle",
            MachineState::Active => "active",
        }
    }
}

/// Which spread statistic to use for the AD/CD series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MadVariant {
    /// Mean of absolute deviations about the median: `sum |d - median| / n`.
    AsPrinted,
    /// Textbook median absolute deviation: `median |d - median|`.
    MedianOfDeviations,
}

/// Absolute area change between consecutive entries: `|a[i] - a[i+1]|`.
pub fn area_differences(areas: &[f64]) -> Result<Vec<f64>> {
    if areas.len() < 2 {
        return Err(Error::InsufficientWindow { need: 2, got: areas.len() });
    }
    Ok(areas.windows(2).map(|w| (w[0] - w[1]).abs()).collect())
}

/// Euclidean distance between consecutive centroids.
pub fn centroid_differences(centroids: &[(f64, f64)]) -> Result<Vec<f64>> {
    if centroids.len() < 2 {
        return Err(Error::InsufficientWindow { need: 2, got: centroids.len() });
    }
    Ok(centroids
        .windows(2)
        .map(|w| {
            let dx = w[1].0 - w[0].0;
            let dy = w[1].1 - w[0].1;
            (dx * dx + dy * dy).sqrt()
        })
        .collect())
}

fn median_of(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Variability of a series about its median, per `variant`.
pub fn mad(series: &[f64], variant: MadVariant) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::InsufficientWindow { need: 1, got: 0 });
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite series"));
    let med = median_of(&sorted);
    match variant {
        MadVariant::AsPrinted => {
            Ok(series.iter().map(|d| (d - med).abs()).sum::<f64>() / series.len() as f64)
        }
        MadVariant::MedianOfDeviations => {
            let mut dev: Vec<f64> = series.iter().map(|d| (d - med).abs()).collect();
            dev.sort_by(|a, b| a.partial_cmp(b).expect("finite series"));
            Ok(median_of(&dev))
        }
    }
}

/// The `(MAD_AD, MAD_CD)` pair for one window of `n` observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowFeatures {
    pub mad_ad: f64,
    pub mad_cd: f64,
    pub n: usize,
}

impl WindowFeatures {
    /// Computes both features from a window's raw areas and centroids.
    pub fn from_window(
        areas: &[f64],
        centroids: &[(f64, f64)],
        variant: MadVariant,
    ) -> Result<Self> {
        if areas.len() != centroids.len() {
            return Err(Error::Internal(format!(
                "window arrays out of sync: {} areas, {} centroids",
                areas.len(),
                centroids.len()
            )));
        }
        let ad = area_differences(areas)?;
        let cd = centroid_differences(centroids)?;
        Ok(WindowFeatures {
            mad_ad: mad(&ad, variant)?,
            mad_cd: mad(&cd, variant)?,
            n: areas.len(),
        })
    }
}

/// Logistic coefficients plus the meaning of the positive class.
///
/// `p` is the probability of `positive_label`. With the default
/// coefficients both weights are negative, so zero-variability windows
/// score high — the positive class defaults to `Idle` to match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdleModel {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub positive_label: MachineState,
}

impl Default for IdleModel {
    /// Coefficients shipped with the pipeline, fitted offline on annotated
    /// construction footage at buffer 15 / 10 FPS.
    fn default() -> Self {
        IdleModel {
            beta0: 2.4613463131,
            beta1: -0.00136793,
            beta2: -0.36581202,
            positive_label: MachineState::Idle,
        }
    }
}

/// Largest magnitude fed to exp(); the sigmoid saturates far earlier.
const LOGIT_CLAMP: f64 = 50.0;

impl IdleModel {
    pub fn validate(&self) -> Result<()> {
        if ![self.beta0, self.beta1, self.beta2].iter().all(|b| b.is_finite()) {
            return Err(Error::invalid("idle model", "coefficients must be finite"));
        }
        Ok(())
    }

    /// Probability of the positive class for a feature pair.
    ///
    /// The exponent is clamped against overflow and the result is pinned
    /// strictly inside (0, 1) so saturated verdicts never round to 0 or 1.
    pub fn probability(&self, mad_ad: f64, mad_cd: f64) -> f64 {
        let z = self.beta0 + self.beta1 * mad_ad + self.beta2 * mad_cd;
        let z = z.clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
        let p = 1.0 / (1.0 + (-z).exp());
        p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
    }

    /// Thresholded verdict: `positive_label` when `p >= 0.5`.
    pub fn classify(&self, features: &WindowFeatures) -> (f64, MachineState) {
        let p = self.probability(features.mad_ad, features.mad_cd);
        let state = if p >= 0.5 { self.positive_label } else { self.positive_label.other() };
        (p, state)
    }
}

/// One classified window of a track.
#[derive(Debug, Clone, PartialEq)]
pub struct IdleVerdict {
    pub track_id: TrackId,
    /// Frame of the oldest observation in the window.
    pub first_frame: u64,
    /// Frame of the newest observation in the window.
    pub last_frame: u64,
    pub p: f64,
    pub state: MachineState,
    pub features: WindowFeatures,
}

/// Tumbling per-track buffer of (area, centroid) observations.
#[derive(Debug, Clone)]
pub struct WindowBuffer {
    areas: Vec<f64>,
    centroids: Vec<(f64, f64)>,
    first_frame: u64,
    /// Newest frame ever pushed for this track; survives window clears so
    /// duplicates are caught across verdict boundaries.
    last_frame: Option<u64>,
}

impl WindowBuffer {
    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }
}

/// Windowing parameters for the idle engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdleConfig {
    /// Observations per window.
    pub capacity: usize,
    /// Nominal stream rate; fixes the wall-clock span of a window.
    pub fps: f64,
    pub mad_variant: MadVariant,
}

impl Default for IdleConfig {
    fn default() -> Self {
        IdleConfig { capacity: 15, fps: 10.0, mad_variant: MadVariant::AsPrinted }
    }
}

impl IdleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.capacity < 2 {
            return Err(Error::invalid("idle config", "capacity must be >= 2"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::invalid("idle config", "fps must be > 0"));
        }
        Ok(())
    }

    /// Seconds of stream time covered by one full window.
    pub fn window_seconds(&self) -> f64 {
        self.capacity as f64 / self.fps
    }
}

/// Per-stream engine holding one tumbling buffer per track id.
///
/// Observations must arrive in frame order per track; an id switch starts
/// a fresh buffer simply because it is a fresh key.
#[derive(Debug, Clone)]
pub struct IdleEngine {
    model: IdleModel,
    config: IdleConfig,
    buffers: HashMap<TrackId, WindowBuffer>,
}

impl IdleEngine {
    pub fn new(model: IdleModel, config: IdleConfig) -> Result<Self> {
        model.validate()?;
        config.validate()?;
        Ok(IdleEngine { model, config, buffers: HashMap::new() })
    }

    pub fn model(&self) -> &IdleModel {
        &self.model
    }

    pub fn config(&self) -> &IdleConfig {
        &self.config
    }

    /// Appends one observation; returns a verdict when it fills a window.
    ///
    /// Gaps are allowed (a lost frame is simply never pushed); differences
    /// are taken over the buffered order.
    pub fn push(&mut self, track_id: TrackId, bbox: &BBox, frame: u64) -> Result<Option<IdleVerdict>> {
        bbox.validate()?;
        let (area, centroid) = (bbox.area(), bbox.centroid());

        let buf = self.buffers.entry(track_id).or_insert_with(|| WindowBuffer {
            areas: Vec::new(),
            centroids: Vec::new(),
            first_frame: frame,
            last_frame: None,
        });
        if let Some(last) = buf.last_frame {
            if frame <= last {
                return Err(Error::DuplicateObservation { track: track_id.0, frame });
            }
        }
        if buf.is_empty() {
            buf.first_frame = frame;
        }
        buf.last_frame = Some(frame);
        buf.areas.push(area);
        buf.centroids.push(centroid);

        if buf.len() < self.config.capacity {
            return Ok(None);
        }

        let features =
            WindowFeatures::from_window(&buf.areas, &buf.centroids, self.config.mad_variant)?;
        let (p, state) = self.model.classify(&features);
        let verdict = IdleVerdict {
            track_id,
            first_frame: buf.first_frame,
            last_frame: frame,
            p,
            state,
            features,
        };
        buf.areas.clear();
        buf.centroids.clear();
        Ok(Some(verdict))
    }

    /// Drops a track's partial buffer (track terminated before the window
    /// filled); no verdict is produced for it.
    pub fn discard(&mut self, track_id: TrackId) {
        self.buffers.remove(&track_id);
    }

    /// Number of buffered observations for a track, if any.
    pub fn buffered(&self, track_id: TrackId) -> usize {
        self.buffers.get(&track_id).map_or(0, WindowBuffer::len)
    }
}
