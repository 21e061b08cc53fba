//! Two-stage association tracker.
//!
//! Per frame: detections are split into high- and low-confidence groups,
//! matched against Kalman-predicted track boxes by minimum-cost assignment
//! on `1 - IoU`, and track lifecycle moves through
//! Tentative -> Active -> Lost -> Terminated. A lost track keeps coasting
//! on its motion estimate and recovers its id if a high-confidence
//! detection overlaps the predicted box before the retention buffer runs
//! out. Low-confidence detections only ever extend existing active tracks.

use serde::{Deserialize, Serialize};

use crate::assignment::{min_cost_assignment, CostMatrix};
use crate::bbox::BBox;
use crate::detection::{ClassLabel, Detection, TrackId};
use crate::error::{Error, Result};
use crate::kalman::{BoxMotionModel, KalmanState};

/// Tracker thresholds and lifecycle knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// Confidence at or above which a detection is high-confidence.
    pub high_thresh: f64,
    /// Minimal confidence kept at all; below this a detection is dropped.
    pub low_thresh: f64,
    /// Minimum confidence for an unmatched detection to spawn a track.
    pub new_track_thresh: f64,
    /// Minimum IoU for an assignment to be accepted.
    pub match_thresh: f64,
    /// Frames a lost track is retained before termination.
    pub track_buffer: u32,
    /// Detections with a smaller area (px^2) are discarded.
    pub min_box_area: f64,
    /// Make track/detection pairs of different classes inadmissible.
    pub class_gated: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            high_thresh: 0.5,
            low_thresh: 0.1,
            new_track_thresh: 0.6,
            match_thresh: 0.8,
            track_buffer: 30,
            min_box_area: 10.0,
            class_gated: true,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.high_thresh && self.high_thresh <= 1.0) {
            return Err(Error::invalid("tracker config", "high_thresh must be in (0,1]"));
        }
        if !(0.0 <= self.low_thresh && self.low_thresh < self.high_thresh) {
            return Err(Error::invalid(
                "tracker config",
                "low_thresh must satisfy 0 <= low_thresh < high_thresh",
            ));
        }
        if !(0.0..=1.0).contains(&self.match_thresh) {
            return Err(Error::invalid("tracker config", "match_thresh must be in [0,1]"));
        }
        if self.track_buffer < 1 {
            return Err(Error::invalid("tracker config", "track_buffer must be >= 1"));
        }
        if !self.min_box_area.is_finite() || self.min_box_area < 0.0 {
            return Err(Error::invalid("tracker config", "min_box_area must be >= 0"));
        }
        if !self.new_track_thresh.is_finite() {
            return Err(Error::invalid("tracker config", "new_track_thresh must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackState {
    Tentative,
    Active,
    Lost,
    Terminated,
}

/// A persistent identity with its motion estimate.
#[derive(Debug, Clone)]
pub struct Track {
    pub id: TrackId,
    pub class: ClassLabel,
    pub state: TrackState,
    pub kalman: KalmanState,
    pub last_bbox: BBox,
    pub last_confidence: f64,
    /// Frames since the last matched update; 0 right after a match.
    pub frames_since_update: u32,
    /// Frames since creation.
    pub age: u32,
}

/// Per-frame output row for an active track.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedObject {
    pub frame: u64,
    pub track_id: TrackId,
    pub class: ClassLabel,
    pub bbox: BBox,
    pub confidence: f64,
}

/// Single-stream tracker state. Calls to [`Tracker::step`] must be
/// serialized per stream; independent streams can run in parallel with
/// separate trackers.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    motion: BoxMotionModel,
    tracks: Vec<Track>,
    next_id: u64,
    last_frame: Option<u64>,
    terminated: Vec<TrackId>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Tracker {
            config,
            motion: BoxMotionModel::default(),
            tracks: Vec::new(),
            next_id: 1,
            last_frame: None,
            terminated: Vec::new(),
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Live (non-terminated) tracks, in creation order.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Ids of tracks terminated since the last call; consumed on read.
    pub fn drain_terminated(&mut self) -> Vec<TrackId> {
        std::mem::take(&mut self.terminated)
    }

    /// Ingests one frame of detections and returns the active tracks.
    ///
    /// `frame` must be strictly greater than the previous call's.
    pub fn step(&mut self, detections: &[Detection], frame: u64) -> Result<Vec<TrackedObject>> {
        if let Some(prev) = self.last_frame {
            if frame <= prev {
                return Err(Error::StreamOrder { frame, previous: prev });
            }
        }
        for d in detections {
            if d.frame != frame {
                return Err(Error::invalid(
                    "detections",
                    format!("detection for frame {} fed to step({frame})", d.frame),
                ));
            }
        }
        let first_frame_of_stream = self.last_frame.is_none();
        self.last_frame = Some(frame);

        // drop sub-threshold detections, split the rest by confidence
        let mut high: Vec<&Detection> = Vec::new();
        let mut low: Vec<&Detection> = Vec::new();
        for d in detections {
            if d.confidence < self.config.low_thresh || d.bbox.area() < self.config.min_box_area {
                continue;
            }
            if d.confidence >= self.config.high_thresh {
                high.push(d);
            } else {
                low.push(d);
            }
        }

        for t in &mut self.tracks {
            t.kalman = self.motion.predict(&t.kalman);
            t.age += 1;
        }

        let mut matched_track = vec![false; self.tracks.len()];

        // first stage: high-confidence detections vs active + lost tracks
        let pool1: Vec<usize> = (0..self.tracks.len())
            .filter(|&i| matches!(self.tracks[i].state, TrackState::Active | TrackState::Lost))
            .collect();
        let mut high_used = vec![false; high.len()];
        self.associate(&pool1, &high, &mut matched_track, &mut high_used)?;

        // second stage: low-confidence detections vs still-unmatched active
        // tracks; lost tracks sit this one out
        let pool2: Vec<usize> = (0..self.tracks.len())
            .filter(|&i| !matched_track[i] && self.tracks[i].state == TrackState::Active)
            .collect();
        let mut low_used = vec![false; low.len()];
        self.associate(&pool2, &low, &mut matched_track, &mut low_used)?;

        // tentative tracks get the leftover high-confidence detections;
        // a match is their first update and promotes them to active
        let pool3: Vec<usize> = (0..self.tracks.len())
            .filter(|&i| self.tracks[i].state == TrackState::Tentative)
            .collect();
        let high_left: Vec<&Detection> = high
            .iter()
            .enumerate()
            .filter(|(j, _)| !high_used[*j])
            .map(|(_, d)| *d)
            .collect();
        let left_index: Vec<usize> =
            (0..high.len()).filter(|j| !high_used[*j]).collect();
        let mut left_used = vec![false; high_left.len()];
        self.associate(&pool3, &high_left, &mut matched_track, &mut left_used)?;
        for (k, used) in left_used.iter().enumerate() {
            if *used {
                high_used[left_index[k]] = true;
            }
        }

        // lifecycle for everything that went unmatched this frame
        for (i, t) in self.tracks.iter_mut().enumerate() {
            if matched_track[i] {
                continue;
            }
            t.frames_since_update += 1;
            match t.state {
                // an unconfirmed track that misses its follow-up is noise
                TrackState::Tentative => t.state = TrackState::Terminated,
                TrackState::Active => t.state = TrackState::Lost,
                TrackState::Lost => {
                    if t.frames_since_update > self.config.track_buffer {
                        t.state = TrackState::Terminated;
                    }
                }
                TrackState::Terminated => {}
            }
        }
        self.terminated.extend(
            self.tracks
                .iter()
                .filter(|t| t.state == TrackState::Terminated)
                .map(|t| t.id),
        );
        self.tracks.retain(|t| t.state != TrackState::Terminated);

        // leftover high-confidence detections spawn tracks; on the first
        // frame of a stream they activate immediately
        for (j, d) in high.iter().enumerate() {
            if high_used[j] || d.confidence < self.config.new_track_thresh {
                continue;
            }
            let state = if first_frame_of_stream {
                TrackState::Active
            } else {
                TrackState::Tentative
            };
            self.tracks.push(Track {
                id: TrackId(self.next_id),
                class: d.class.clone(),
                state,
                kalman: self.motion.init(&d.bbox),
                last_bbox: d.bbox,
                last_confidence: d.confidence,
                frames_since_update: 0,
                age: 0,
            });
            self.next_id += 1;
        }

        Ok(self
            .tracks
            .iter()
            .filter(|t| t.state == TrackState::Active && t.frames_since_update == 0)
            .map(|t| TrackedObject {
                frame,
                track_id: t.id,
                class: t.class.clone(),
                bbox: t.last_bbox,
                confidence: t.last_confidence,
            })
            .collect())
    }

    /// Matches `pool` (indices into `self.tracks`) against `dets` and
    /// applies updates. `1 - IoU` cost on the predicted boxes, gated at
    /// `1 - match_thresh`; cross-class pairs are inadmissible when class
    /// gating is on.
    fn associate(
        &mut self,
        pool: &[usize],
        dets: &[&Detection],
        matched_track: &mut [bool],
        det_used: &mut [bool],
    ) -> Result<()> {
        if pool.is_empty() || dets.is_empty() {
            return Ok(());
        }
        let gate = 1.0 - self.config.match_thresh;
        let cost = CostMatrix::from_fn(pool.len(), dets.len(), |r, c| {
            let track = &self.tracks[pool[r]];
            let det = dets[c];
            if self.config.class_gated && track.class.id != det.class.id {
                return f64::INFINITY;
            }
            1.0 - track.kalman.bbox().iou(&det.bbox)
        });
        let assignment = min_cost_assignment(&cost, gate);
        for (r, c) in assignment.pairs {
            let idx = pool[r];
            let det = dets[c];
            let t = &mut self.tracks[idx];
            t.kalman = self.motion.update(&t.kalman, &det.bbox)?;
            t.last_bbox = det.bbox;
            t.last_confidence = det.confidence;
            t.frames_since_update = 0;
            t.state = TrackState::Active; // recovers lost, promotes tentative
            matched_track[idx] = true;
            det_used[c] = true;
        }
        Ok(())
    }
}
