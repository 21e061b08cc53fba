//! Streaming pipeline: tracker, idle engine, and frame-ordered track-row
//! emission with verdict backfill.
//!
//! A row is written for every active track per frame, but its idle state
//! is only known once the track's window fills (or the track dies with a
//! partial buffer). Rows therefore pend for at most one window plus the
//! lost-track retention, keeping memory bounded by live tracks and buffer
//! capacity rather than stream length.

use std::collections::{BTreeMap, VecDeque};

use crate::detection::{Detection, TrackId};
use crate::error::Result;
use crate::idle::{IdleConfig, IdleEngine, IdleModel, IdleVerdict};
use crate::io::{RecordState, TrackRecord};
use crate::simulator::{generate, GroundTruth, ScenarioSpec};
use crate::tracker::{Tracker, TrackerConfig};

#[derive(Debug, Clone)]
struct PendingRow {
    seq: u64,
    record: TrackRecord,
    resolved: bool,
}

/// Buffers rows until a verdict (or track death) fixes their state, then
/// releases them in emission order.
#[derive(Debug, Clone)]
pub struct VerdictAnnotator {
    engine: IdleEngine,
    pending: VecDeque<PendingRow>,
    /// Unresolved row sequence numbers per track.
    open: BTreeMap<TrackId, Vec<u64>>,
    next_seq: u64,
}

impl VerdictAnnotator {
    pub fn new(model: IdleModel, config: IdleConfig) -> Result<Self> {
        Ok(VerdictAnnotator {
            engine: IdleEngine::new(model, config)?,
            pending: VecDeque::new(),
            open: BTreeMap::new(),
            next_seq: 0,
        })
    }

    pub fn engine(&self) -> &IdleEngine {
        &self.engine
    }

    /// Feeds one row; the observation goes into the track's window and any
    /// produced verdict resolves the rows it covers. Returns rows that
    /// became emittable.
    pub fn push_row(&mut self, mut record: TrackRecord) -> Result<Vec<TrackRecord>> {
        let track_id = TrackId(record.track_id);
        let bbox = crate::bbox::BBox::new(record.x, record.y, record.w, record.h)?;
        record.state = RecordState::ActiveUnknown;
        record.p = None;

        let seq = self.next_seq;
        self.next_seq += 1;
        let frame = record.frame;
        self.pending.push_back(PendingRow { seq, record, resolved: false });
        self.open.entry(track_id).or_default().push(seq);

        if let Some(verdict) = self.engine.push(track_id, &bbox, frame)? {
            self.apply_verdict(&verdict);
        }
        Ok(self.flush())
    }

    fn apply_verdict(&mut self, verdict: &IdleVerdict) {
        let state: RecordState = verdict.state.into();
        if let Some(seqs) = self.open.get_mut(&verdict.track_id) {
            let front_seq = self.pending.front().map_or(0, |r| r.seq);
            for seq in seqs.drain(..) {
                let idx = (seq - front_seq) as usize;
                let row = &mut self.pending[idx];
                debug_assert_eq!(row.seq, seq);
                if row.record.frame >= verdict.first_frame && row.record.frame <= verdict.last_frame
                {
                    row.record.state = state;
                    row.record.p = Some(verdict.p);
                }
                row.resolved = true;
            }
        }
    }

    /// Track ended: its partial window is discarded and its open rows stay
    /// unclassified.
    pub fn mark_terminated(&mut self, track_id: TrackId) -> Vec<TrackRecord> {
        self.engine.discard(track_id);
        if let Some(seqs) = self.open.remove(&track_id) {
            let front_seq = self.pending.front().map_or(0, |r| r.seq);
            for seq in seqs {
                let idx = (seq - front_seq) as usize;
                self.pending[idx].resolved = true;
            }
        }
        self.flush()
    }

    /// End of stream: everything still pending goes out unclassified.
    pub fn finish(&mut self) -> Vec<TrackRecord> {
        for row in self.pending.iter_mut() {
            row.resolved = true;
        }
        self.open.clear();
        self.flush()
    }

    fn flush(&mut self) -> Vec<TrackRecord> {
        let mut out = Vec::new();
        while matches!(self.pending.front(), Some(row) if row.resolved) {
            out.push(self.pending.pop_front().expect("peeked").record);
        }
        out
    }

    /// Rows currently held back.
    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }
}

/// Tracker + idle engine over a detection stream, emitting track records.
#[derive(Debug, Clone)]
pub struct Pipeline {
    tracker: Tracker,
    annotator: VerdictAnnotator,
}

impl Pipeline {
    pub fn new(tracker_config: TrackerConfig, model: IdleModel, idle_config: IdleConfig) -> Result<Self> {
        Ok(Pipeline {
            tracker: Tracker::new(tracker_config)?,
            annotator: VerdictAnnotator::new(model, idle_config)?,
        })
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    /// Processes one frame of detections; returns finalized rows.
    pub fn step(&mut self, detections: &[Detection], frame: u64) -> Result<Vec<TrackRecord>> {
        let outputs = self.tracker.step(detections, frame)?;
        let mut rows = Vec::new();
        for o in &outputs {
            let record = TrackRecord {
                frame: o.frame,
                track_id: o.track_id.0,
                class_id: o.class.id,
                x: o.bbox.x,
                y: o.bbox.y,
                w: o.bbox.w,
                h: o.bbox.h,
                confidence: o.confidence,
                state: RecordState::ActiveUnknown,
                p: None,
            };
            rows.extend(self.annotator.push_row(record)?);
        }
        for id in self.tracker.drain_terminated() {
            rows.extend(self.annotator.mark_terminated(id));
        }
        Ok(rows)
    }

    /// Flushes everything at end of stream.
    pub fn finish(&mut self) -> Vec<TrackRecord> {
        self.annotator.finish()
    }

    /// Runs a whole frame-grouped stream through the pipeline.
    pub fn run(
        &mut self,
        frames: impl IntoIterator<Item = (u64, Vec<Detection>)>,
        mut sink: impl FnMut(TrackRecord) -> Result<()>,
    ) -> Result<()> {
        for (frame, dets) in frames {
            for row in self.step(&dets, frame)? {
                sink(row)?;
            }
        }
        for row in self.finish() {
            sink(row)?;
        }
        Ok(())
    }

    /// Rows currently held back awaiting verdicts.
    pub fn pending_len(&self) -> usize {
        self.annotator.pending_len()
    }
}

/// Groups a frame-ordered detection iterator into per-frame batches.
///
/// Missing frames between detections are emitted as empty batches so the
/// tracker sees every frame tick.
pub struct FrameBatches<I: Iterator<Item = Result<Detection>>> {
    source: std::iter::Peekable<I>,
    next_frame: Option<u64>,
    done: bool,
}

impl<I: Iterator<Item = Result<Detection>>> FrameBatches<I> {
    pub fn new(source: I) -> Self {
        FrameBatches { source: source.peekable(), next_frame: None, done: false }
    }
}

impl<I: Iterator<Item = Result<Detection>>> Iterator for FrameBatches<I> {
    type Item = Result<(u64, Vec<Detection>)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        // find the frame to emit
        let upcoming = match self.source.peek() {
            Some(Ok(d)) => Some(d.frame),
            Some(Err(_)) => {
                let err = self.source.next().expect("peeked").unwrap_err();
                self.done = true;
                return Some(Err(err));
            }
            None => None,
        };
        let emit = match (self.next_frame, upcoming) {
            (Some(f), Some(u)) if f < u => f, // gap: empty tick
            (_, Some(u)) => u,
            (_, None) => {
                self.done = true;
                return None;
            }
        };
        self.next_frame = Some(emit + 1);

        let mut batch = Vec::new();
        while matches!(self.source.peek(), Some(Ok(d)) if d.frame == emit) {
            batch.push(self.source.next().expect("peeked").expect("peeked ok"));
        }
        Some(Ok((emit, batch)))
    }
}

/// Runs the full stack on a scenario and returns each completed window's
/// features paired with its oracle label, for model training/evaluation.
///
/// Windows on clutter-born tracks (no owning entity) are skipped.
pub fn labeled_windows(
    spec: &ScenarioSpec,
    tracker_config: &TrackerConfig,
    idle_config: &IdleConfig,
    iou_match: f64,
    eps_v: f64,
) -> Result<Vec<crate::io::LabeledWindow>> {
    let (detections, truth) = generate(spec)?;
    let (verdicts, tracked) = run_verdicts(&detections, tracker_config, idle_config)?;
    let owners = crate::eval::track_owners(&tracked, &truth, iou_match);
    Ok(verdicts
        .iter()
        .filter_map(|v| {
            let entity = owners.get(&v.track_id).copied().flatten()?;
            let label = truth.window_idle_label(entity, v.first_frame, v.last_frame, eps_v);
            Some(crate::io::LabeledWindow { features: v.features, label })
        })
        .collect())
}

/// Tracker + idle over an in-memory stream, returning raw verdicts and the
/// tracked boxes (for ownership/metrics).
pub fn run_verdicts(
    detections: &[Detection],
    tracker_config: &TrackerConfig,
    idle_config: &IdleConfig,
) -> Result<(Vec<IdleVerdict>, Vec<crate::tracker::TrackedObject>)> {
    let mut tracker = Tracker::new(tracker_config.clone())?;
    let mut engine = IdleEngine::new(IdleModel::default(), *idle_config)?;
    let mut verdicts = Vec::new();
    let mut tracked = Vec::new();

    let batches = FrameBatches::new(detections.iter().cloned().map(Ok));
    for batch in batches {
        let (frame, dets) = batch?;
        let outputs = tracker.step(&dets, frame)?;
        for o in &outputs {
            if let Some(v) = engine.push(o.track_id, &o.bbox, frame)? {
                verdicts.push(v);
            }
        }
        for id in tracker.drain_terminated() {
            engine.discard(id);
        }
        tracked.extend(outputs);
    }
    Ok((verdicts, tracked))
}

/// Convenience used by utilities and tests: run a full labeled scenario
/// through [`Pipeline`] and collect the rows.
pub fn run_scenario_rows(
    spec: &ScenarioSpec,
    tracker_config: &TrackerConfig,
    model: IdleModel,
    idle_config: &IdleConfig,
) -> Result<(Vec<TrackRecord>, GroundTruth)> {
    let (detections, truth) = generate(spec)?;
    let mut pipeline = Pipeline::new(tracker_config.clone(), model, *idle_config)?;
    let mut rows = Vec::new();
    pipeline.run(
        FrameBatches::new(detections.iter().cloned().map(Ok)).map(|r| r.expect("in-memory")),
        |row| {
            rows.push(row);
            Ok(())
        },
    )?;
    Ok((rows, truth))
}
