//! Deterministic scenario generator.
//!
//! Scripted machines move through a frame under configurable noise, and
//! the generator emits both the detection stream a detector would produce
//! and the ground truth needed to score the tracker and the idle engine
//! against it. Everything is a pure function of (spec, seed).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::bbox::BBox;
use crate::detection::{ClassLabel, Detection};
use crate::error::{Error, Result};
use crate::idle::MachineState;

/// How a machine moves during one script segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MotionMode {
    /// Holds an anchor position; optional per-frame positional jitter.
    Stationary { jitter_std: f64 },
    /// Constant velocity in pixels per frame.
    Linear { vx: f64, vy: f64 },
    /// Alternates moving and standing still: the first
    /// `round(duty * period)` frames of each period move at `(vx, vy)`.
    StopGo { period: u32, duty: f64, vx: f64, vy: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionSegment {
    /// Frames this segment lasts.
    pub frames: u32,
    #[serde(flatten)]
    pub mode: MotionMode,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MotionScript {
    pub segments: Vec<MotionSegment>,
}

/// One scripted machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineSpec {
    pub class: ClassLabel,
    pub bbox: BBox,
    #[serde(default)]
    pub script: MotionScript,
    /// `[start, end)` frame intervals during which the machine is hidden.
    #[serde(default)]
    pub occlusions: Vec<(u64, u64)>,
}

/// Detector imperfections applied to visible machines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// Probability a visible machine produces no detection on a frame.
    pub miss_prob: f64,
    /// Gaussian std added to box position and size, in pixels.
    pub bbox_jitter_std: f64,
    pub confidence_mean: f64,
    pub confidence_std: f64,
    /// Poisson rate of clutter detections per frame.
    pub false_positive_rate: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            miss_prob: 0.0,
            bbox_jitter_std: 0.0,
            confidence_mean: 0.9,
            confidence_std: 0.0,
            false_positive_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub frame_count: u64,
    pub frame_width: f64,
    pub frame_height: f64,
    pub fps: f64,
    pub machines: Vec<MachineSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.frame_count == 0 {
            return Err(Error::invalid("scenario", "frame_count must be >= 1"));
        }
        if !(self.frame_width > 0.0 && self.frame_height > 0.0) {
            return Err(Error::invalid("scenario", "frame size must be positive"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::invalid("scenario", "fps must be > 0"));
        }
        let n = &self.noise;
        for (field, v) in [("noise.miss_prob", n.miss_prob)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid("scenario", format!("{field} must be in [0,1]")));
            }
        }
        for (field, v) in [
            ("noise.bbox_jitter_std", n.bbox_jitter_std),
            ("noise.confidence_std", n.confidence_std),
            ("noise.false_positive_rate", n.false_positive_rate),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid("scenario", format!("{field} must be >= 0")));
            }
        }
        if !(0.0..=1.0).contains(&n.confidence_mean) {
            return Err(Error::invalid("scenario", "noise.confidence_mean must be in [0,1]"));
        }
        for (i, m) in self.machines.iter().enumerate() {
            m.bbox.validate()?;
            let inside = m.bbox.x >= 0.0
                && m.bbox.y >= 0.0
                && m.bbox.x + m.bbox.w <= self.frame_width
                && m.bbox.y + m.bbox.h <= self.frame_height;
            if !inside {
                return Err(Error::invalid(
                    "scenario",
                    format!("machines[{i}].bbox must start inside the frame"),
                ));
            }
            for (k, seg) in m.script.segments.iter().enumerate() {
                if seg.frames < 1 {
                    return Err(Error::invalid(
                        "scenario",
                        format!("machines[{i}].script[{k}].frames must be >= 1"),
                    ));
                }
                match seg.mode {
                    MotionMode::Stationary { jitter_std } => {
                        if !(jitter_std.is_finite() && jitter_std >= 0.0) {
                            return Err(Error::invalid(
                                "scenario",
                                format!("machines[{i}].script[{k}].jitter_std must be >= 0"),
                            ));
                        }
                    }
                    MotionMode::Linear { vx, vy } => {
                        if !(vx.is_finite() && vy.is_finite()) {
                            return Err(Error::invalid(
                                "scenario",
                                format!("machines[{i}].script[{k}] velocity must be finite"),
                            ));
                        }
                    }
                    MotionMode::StopGo { period, duty, vx, vy } => {
                        if period < 1 {
                            return Err(Error::invalid(
                                "scenario",
                                format!("machines[{i}].script[{k}].period must be >= 1"),
                            ));
                        }
                        if !(0.0..=1.0).contains(&duty) {
                            return Err(Error::invalid(
                                "scenario",
                                format!("machines[{i}].script[{k}].duty must be in [0,1]"),
                            ));
                        }
                        if !(vx.is_finite() && vy.is_finite()) {
                            return Err(Error::invalid(
                                "scenario",
                                format!("machines[{i}].script[{k}] velocity must be finite"),
                            ));
                        }
                    }
                }
            }
            for (k, (start, end)) in m.occlusions.iter().enumerate() {
                if start >= end {
                    return Err(Error::invalid(
                        "scenario",
                        format!("machines[{i}].occlusions[{k}] must satisfy start < end"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Per-frame ground-truth entry for one entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtBox {
    pub entity_id: u32,
    pub class: ClassLabel,
    /// True box clipped to the frame.
    pub bbox: BBox,
    pub visible: bool,
    /// Set when the true box extended past the frame and was clipped.
    pub clipped: bool,
}

/// Full scenario truth: per-frame boxes plus the unclipped true paths the
/// idle oracle is defined on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub frame_width: f64,
    pub frame_height: f64,
    pub fps: f64,
    /// `frames[t]` lists every entity present at frame `t`.
    pub frames: Vec<Vec<GtBox>>,
    /// `true_boxes[entity][t]`: unclipped true box of an entity at frame `t`.
    pub true_boxes: Vec<Vec<BBox>>,
    pub entity_classes: Vec<ClassLabel>,
}

/// Oracle label for one tumbling window of one entity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowLabel {
    pub entity_id: u32,
    pub first_frame: u64,
    pub last_frame: u64,
    pub state: MachineState,
}

impl GroundTruth {
    pub fn entity_count(&self) -> usize {
        self.true_boxes.len()
    }

    /// Idle iff every per-frame step of the true path inside
    /// `[first, last]` moves the centroid less than `eps_v` pixels and
    /// changes the area less than `eps_v^2` square pixels.
    pub fn window_idle_label(
        &self,
        entity_id: u32,
        first_frame: u64,
        last_frame: u64,
        eps_v: f64,
    ) -> MachineState {
        let eps_a = eps_v * eps_v;
        let path = &self.true_boxes[entity_id as usize];
        let last = (last_frame as usize).min(path.len() - 1);
        for t in first_frame as usize..last {
            let (x0, y0) = path[t].centroid();
            let (x1, y1) = path[t + 1].centroid();
            let step = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
            if step >= eps_v {
                return MachineState::Active;
            }
            if (path[t + 1].area() - path[t].area()).abs() >= eps_a {
                return MachineState::Active;
            }
        }
        MachineState::Idle
    }
}

/// Tumbling-window oracle labels for every entity, windows `[kB, kB+B-1]`.
pub fn oracle_idle_labels(gt: &GroundTruth, capacity: usize, eps_v: f64) -> Result<Vec<WindowLabel>> {
    if capacity < 2 {
        return Err(Error::invalid("oracle", "capacity must be >= 2"));
    }
    let frame_count = gt.frames.len() as u64;
    let cap = capacity as u64;
    let mut labels = Vec::new();
    for entity in 0..gt.entity_count() as u32 {
        let mut first = 0u64;
        while first + cap <= frame_count {
            let last = first + cap - 1;
            labels.push(WindowLabel {
                entity_id: entity,
                first_frame: first,
                last_frame: last,
                state: gt.window_idle_label(entity, first, last, eps_v),
            });
            first += cap;
        }
    }
    Ok(labels)
}

struct MachineRunner<'a> {
    spec: &'a MachineSpec,
    pos: (f64, f64),
    anchor: (f64, f64),
    seg_index: usize,
    seg_elapsed: u32,
}

impl<'a> MachineRunner<'a> {
    fn new(spec: &'a MachineSpec) -> Self {
        MachineRunner {
            spec,
            pos: (spec.bbox.x, spec.bbox.y),
            anchor: (spec.bbox.x, spec.bbox.y),
            seg_index: 0,
            seg_elapsed: 0,
        }
    }

    /// Advances one frame; the segment active before the step governs it.
    fn step(&mut self, rng: &mut ChaCha12Rng) {
        let segments = &self.spec.script.segments;
        if self.seg_index >= segments.len() {
            return; // script exhausted: hold position
        }
        let seg = &segments[self.seg_index];
        match seg.mode {
            MotionMode::Stationary { jitter_std } => {
                if jitter_std > 0.0 {
                    let normal = Normal::new(0.0, jitter_std).expect("validated std");
                    self.pos.0 = self.anchor.0 + normal.sample(rng);
                    self.pos.1 = self.anchor.1 + normal.sample(rng);
                } else {
                    self.pos = self.anchor;
                }
            }
            MotionMode::Linear { vx, vy } => {
                self.pos.0 += vx;
                self.pos.1 += vy;
            }
            MotionMode::StopGo { period, duty, vx, vy } => {
                let move_frames = (period as f64 * duty).round() as u32;
                if self.seg_elapsed % period < move_frames {
                    self.pos.0 += vx;
                    self.pos.1 += vy;
                }
            }
        }
        self.seg_elapsed += 1;
        if self.seg_elapsed >= seg.frames {
            self.seg_index += 1;
            self.seg_elapsed = 0;
            self.anchor = self.pos;
        }
    }

    fn true_bbox(&self) -> BBox {
        BBox { x: self.pos.0, y: self.pos.1, w: self.spec.bbox.w, h: self.spec.bbox.h }
    }
}

fn clip_to_frame(b: &BBox, width: f64, height: f64) -> Option<(BBox, bool)> {
    let x1 = b.x.max(0.0);
    let y1 = b.y.max(0.0);
    let x2 = (b.x + b.w).min(width);
    let y2 = (b.y + b.h).min(height);
    if x2 - x1 <= 0.0 || y2 - y1 <= 0.0 {
        return None;
    }
    let clipped = BBox { x: x1, y: y1, w: x2 - x1, h: y2 - y1 };
    let was_clipped = clipped != *b;
    Some((clipped, was_clipped))
}

/// Runs a scenario: ground truth plus the noisy detection stream.
pub fn generate(spec: &ScenarioSpec) -> Result<(Vec<Detection>, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let noise = &spec.noise;

    let jitter = if noise.bbox_jitter_std > 0.0 {
        Some(Normal::new(0.0, noise.bbox_jitter_std).expect("validated std"))
    } else {
        None
    };
    let conf_noise = if noise.confidence_std > 0.0 {
        Some(Normal::new(0.0, noise.confidence_std).expect("validated std"))
    } else {
        None
    };
    let clutter = if noise.false_positive_rate > 0.0 {
        Some(Poisson::new(noise.false_positive_rate).expect("validated rate"))
    } else {
        None
    };

    let mut runners: Vec<MachineRunner> = spec.machines.iter().map(MachineRunner::new).collect();
    let mut detections = Vec::new();
    let mut gt = GroundTruth {
        frame_width: spec.frame_width,
        frame_height: spec.frame_height,
        fps: spec.fps,
        frames: Vec::with_capacity(spec.frame_count as usize),
        true_boxes: vec![Vec::with_capacity(spec.frame_count as usize); spec.machines.len()],
        entity_classes: spec.machines.iter().map(|m| m.class.clone()).collect(),
    };

    for frame in 0..spec.frame_count {
        if frame > 0 {
            for r in runners.iter_mut() {
                r.step(&mut rng);
            }
        }

        let mut row = Vec::with_capacity(runners.len());
        for (entity, r) in runners.iter().enumerate() {
            let true_box = r.true_bbox();
            gt.true_boxes[entity].push(true_box);

            let occluded = r
                .spec
                .occlusions
                .iter()
                .any(|(start, end)| frame >= *start && frame < *end);
            let (gt_box, was_clipped, in_frame) =
                match clip_to_frame(&true_box, spec.frame_width, spec.frame_height) {
                    Some((b, c)) => (b, c, true),
                    None => (true_box, true, false),
                };
            let visible = !occluded && in_frame;
            row.push(GtBox {
                entity_id: entity as u32,
                class: r.spec.class.clone(),
                bbox: gt_box,
                visible,
                clipped: was_clipped,
            });

            if !visible {
                continue;
            }
            if noise.miss_prob > 0.0 && rng.random::<f64>() < noise.miss_prob {
                continue;
            }
            let mut b = gt_box;
            if let Some(j) = &jitter {
                b.x += j.sample(&mut rng);
                b.y += j.sample(&mut rng);
                b.w = (b.w + j.sample(&mut rng)).max(1.0);
                b.h = (b.h + j.sample(&mut rng)).max(1.0);
            }
            let Some((b, _)) = clip_to_frame(&b, spec.frame_width, spec.frame_height) else {
                continue; // jittered fully out of frame
            };
            let mut conf = noise.confidence_mean;
            if let Some(c) = &conf_noise {
                conf += c.sample(&mut rng);
            }
            let conf = conf.clamp(0.0, 1.0);
            detections.push(Detection { frame, bbox: b, confidence: conf, class: r.spec.class.clone() });
        }
        gt.frames.push(row);

        if let Some(p) = &clutter {
            let count = p.sample(&mut rng) as u64;
            for _ in 0..count {
                let w = rng.random_range(10.0..80.0_f64).min(spec.frame_width);
                let h = rng.random_range(10.0..80.0_f64).min(spec.frame_height);
                let x = rng.random_range(0.0..(spec.frame_width - w).max(f64::MIN_POSITIVE));
                let y = rng.random_range(0.0..(spec.frame_height - h).max(f64::MIN_POSITIVE));
                let class = if spec.machines.is_empty() {
                    ClassLabel::excavator()
                } else {
                    let k = rng.random_range(0..spec.machines.len());
                    spec.machines[k].class.clone()
                };
                let mut conf = noise.confidence_mean;
                if let Some(c) = &conf_noise {
                    conf += c.sample(&mut rng);
                }
                detections.push(Detection {
                    frame,
                    bbox: BBox { x, y, w, h },
                    confidence: conf.clamp(0.0, 1.0),
                    class,
                });
            }
        }
    }

    Ok((detections, gt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stationary_machine(x: f64, y: f64) -> MachineSpec {
        MachineSpec {
            class: ClassLabel::excavator(),
            bbox: BBox::new(x, y, 40.0, 30.0).unwrap(),
            script: MotionScript {
                segments: vec![MotionSegment {
                    frames: 1000,
                    mode: MotionMode::Stationary { jitter_std: 0.0 },
                }],
            },
            occlusions: vec![],
        }
    }

    fn base_spec(machines: Vec<MachineSpec>, frames: u64, seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            frame_count: frames,
            frame_width: 640.0,
            frame_height: 640.0,
            fps: 10.0,
            machines,
            noise: NoiseSpec::default(),
            seed,
        }
    }

    #[test]
    fn degenerate_stationary_scenario() {
        let spec = base_spec(vec![stationary_machine(100.0, 100.0)], 30, 1);
        let (dets, gt) = generate(&spec).unwrap();
        assert_eq!(dets.len(), 30);
        assert_eq!(gt.frames.len(), 30);
        for d in &dets {
            assert_eq!(d.bbox, dets[0].bbox);
            assert_eq!(d.confidence, 0.9);
        }
        for row in &gt.frames {
            assert_eq!(row.len(), 1);
            assert_eq!(row[0].bbox, gt.frames[0][0].bbox);
            assert!(row[0].visible);
            assert!(!row[0].clipped);
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let mut machine = stationary_machine(50.0, 50.0);
        machine.script.segments[0].mode = MotionMode::Stationary { jitter_std: 0.7 };
        let mut spec = base_spec(vec![machine], 100, 42);
        spec.noise = NoiseSpec {
            miss_prob: 0.1,
            bbox_jitter_std: 2.0,
            confidence_mean: 0.7,
            confidence_std: 0.15,
            false_positive_rate: 0.5,
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);

        let mut other = spec.clone();
        other.seed = 43;
        let c = generate(&other).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn linear_motion_advances_two_px_per_frame() {
        let machine = MachineSpec {
            class: ClassLabel::dump_truck(),
            bbox: BBox::new(0.0, 0.0, 10.0, 10.0).unwrap(),
            script: MotionScript {
                segments: vec![MotionSegment {
                    frames: 10,
                    mode: MotionMode::Linear { vx: 2.0, vy: 0.0 },
                }],
            },
            occlusions: vec![],
        };
        let spec = base_spec(vec![machine], 10, 7);
        let (_, gt) = generate(&spec).unwrap();
        // 9 steps of 2 px
        assert_eq!(gt.true_boxes[0][9].x, 18.0);
        assert_eq!(gt.frames[9][0].bbox.x, 18.0);
    }

    #[test]
    fn occluded_frames_are_invisible_and_unemitted() {
        let mut machine = stationary_machine(100.0, 100.0);
        machine.occlusions = vec![(10, 15)];
        let spec = base_spec(vec![machine], 20, 3);
        let (dets, gt) = generate(&spec).unwrap();
        assert_eq!(dets.len(), 15);
        for (t, row) in gt.frames.iter().enumerate() {
            assert_eq!(row[0].visible, !(10..15).contains(&(t as u64)));
        }
    }

    #[test]
    fn leaving_the_frame_clips_and_flags() {
        let machine = MachineSpec {
            class: ClassLabel::excavator(),
            bbox: BBox::new(600.0, 100.0, 30.0, 30.0).unwrap(),
            script: MotionScript {
                segments: vec![MotionSegment {
                    frames: 40,
                    mode: MotionMode::Linear { vx: 5.0, vy: 0.0 },
                }],
            },
            occlusions: vec![],
        };
        let spec = base_spec(vec![machine], 20, 3);
        let (dets, gt) = generate(&spec).unwrap();
        // by frame 3 the box extends past 640 and must be clipped
        let late = &gt.frames[5][0];
        assert!(late.clipped);
        assert!(late.bbox.x + late.bbox.w <= 640.0 + 1e-9);
        for d in &dets {
            assert!(d.bbox.x >= 0.0 && d.bbox.x + d.bbox.w <= 640.0 + 1e-9);
        }
    }

    #[test]
    fn oracle_labels_stationary_idle_linear_active() {
        let moving = MachineSpec {
            class: ClassLabel::dump_truck(),
            bbox: BBox::new(10.0, 200.0, 30.0, 30.0).unwrap(),
            script: MotionScript {
                segments: vec![MotionSegment {
                    frames: 100,
                    mode: MotionMode::Linear { vx: 5.0, vy: 0.0 },
                }],
            },
            occlusions: vec![],
        };
        let spec = base_spec(vec![stationary_machine(400.0, 400.0), moving], 60, 9);
        let (_, gt) = generate(&spec).unwrap();
        let labels = oracle_idle_labels(&gt, 15, 1.0).unwrap();
        assert_eq!(labels.len(), 8); // 2 entities x 4 windows
        for l in labels {
            let want = if l.entity_id == 0 { MachineState::Idle } else { MachineState::Active };
            assert_eq!(l.state, want, "entity {} window {:?}", l.entity_id, (l.first_frame, l.last_frame));
        }
    }

    #[test]
    fn stop_go_alternates_window_labels() {
        let machine = MachineSpec {
            class: ClassLabel::excavator(),
            bbox: BBox::new(10.0, 10.0, 30.0, 30.0).unwrap(),
            script: MotionScript {
                segments: vec![MotionSegment {
                    frames: 120,
                    mode: MotionMode::StopGo { period: 30, duty: 0.5, vx: 3.0, vy: 0.0 },
                }],
            },
            occlusions: vec![],
        };
        let spec = base_spec(vec![machine], 120, 5);
        let (_, gt) = generate(&spec).unwrap();
        let labels = oracle_idle_labels(&gt, 15, 0.5).unwrap();
        let states: Vec<MachineState> = labels.iter().map(|l| l.state).collect();
        assert_eq!(states.len(), 8);
        for (k, s) in states.iter().enumerate() {
            let want = if k % 2 == 0 { MachineState::Active } else { MachineState::Idle };
            assert_eq!(*s, want, "window {k}");
        }
    }

    #[test]
    fn miss_rate_converges_to_miss_prob() {
        let mut spec = base_spec(vec![stationary_machine(100.0, 100.0)], 20_000, 1234);
        spec.noise.miss_prob = 0.15;
        let (dets, gt) = generate(&spec).unwrap();
        let visible = gt.frames.iter().filter(|row| row[0].visible).count() as f64;
        let missed = visible - dets.len() as f64;
        let p = 0.15f64;
        let se = (p * (1.0 - p) / visible).sqrt();
        assert!(
            (missed / visible - p).abs() <= 3.0 * se,
            "empirical miss rate {} vs {p}",
            missed / visible
        );
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut spec = base_spec(vec![stationary_machine(100.0, 100.0)], 10, 1);
        spec.noise.miss_prob = 1.5;
        assert!(spec.validate().is_err());

        let mut spec = base_spec(vec![stationary_machine(630.0, 100.0)], 10, 1);
        spec.machines[0].bbox.w = 100.0; // extends past the frame
        assert!(spec.validate().is_err());

        let mut spec = base_spec(vec![stationary_machine(100.0, 100.0)], 10, 1);
        spec.machines[0].occlusions = vec![(5, 5)];
        assert!(spec.validate().is_err());

        let mut spec = base_spec(vec![stationary_machine(100.0, 100.0)], 10, 1);
        spec.machines[0].script.segments[0].frames = 0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn noise_free_stream_equals_visible_ground_truth() {
        let mut machine = stationary_machine(200.0, 200.0);
        machine.occlusions = vec![(5, 8)];
        let spec = base_spec(vec![machine, stationary_machine(400.0, 100.0)], 40, 77);
        let (dets, gt) = generate(&spec).unwrap();
        let mut expected = Vec::new();
        for (t, row) in gt.frames.iter().enumerate() {
            for g in row {
                if g.visible {
                    expected.push((t as u64, g.bbox));
                }
            }
        }
        let got: Vec<(u64, BBox)> = dets.iter().map(|d| (d.frame, d.bbox)).collect();
        assert_eq!(got, expected);
    }
}
