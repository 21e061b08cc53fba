//! Benchmark harness: per-stage latencies and throughput over a
//! detection file, warm-up excluded.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use idletrack::detection::Detection;
use idletrack::error::{Error, Result};
use idletrack::idle::{IdleConfig, IdleEngine, IdleModel};
use idletrack::tracker::{Tracker, TrackerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    pub p95_ms: f64,
}

impl LatencyStats {
    fn from_samples(samples: &mut [f64]) -> LatencyStats {
        assert!(!samples.is_empty());
        samples.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let p95 = samples[((n as f64 * 0.95).ceil() as usize).clamp(1, n) - 1];
        LatencyStats { mean_ms: mean, min_ms: samples[0], max_ms: samples[n - 1], p95_ms: p95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub frames_processed: u64,
    pub detections_ingested: u64,
    pub rows_emitted: u64,
    pub verdicts_emitted: u64,
    pub repetitions: u32,
    /// Seconds spent processing (parsing excluded unless requested).
    pub wall_time_s: f64,
    pub parse_time_s: f64,
    pub parse_included: bool,
    pub throughput_fps: f64,
    pub tracker: LatencyStats,
    pub idle: LatencyStats,
    pub frame_total: LatencyStats,
    /// Stream length in seconds at the configured FPS.
    pub video_duration_s: f64,
    /// wall_time / video_duration: < 1 means faster than real time.
    pub speed_factor: f64,
    /// Video seconds divided by achieved FPS.
    pub processing_time_s: f64,
}

/// Table 2-style accounting: seconds of video divided by achieved FPS.
pub fn processing_time_accounting(video_seconds: f64, fps: f64) -> f64 {
    video_seconds / fps
}

/// Runs `repetitions` timed passes over pre-grouped frames after one
/// untimed warm-up pass. Counters must agree across passes.
pub fn run_bench(
    frames: &[(u64, Vec<Detection>)],
    tracker_config: &TrackerConfig,
    model: IdleModel,
    idle_config: IdleConfig,
    repetitions: u32,
    parse_time_s: f64,
    include_parse: bool,
) -> Result<BenchReport> {
    if frames.is_empty() {
        return Err(Error::EmptyEvaluation("no frames to benchmark".to_string()));
    }
    let repetitions = repetitions.max(1);

    let mut tracker_samples = Vec::new();
    let mut idle_samples = Vec::new();
    let mut total_samples = Vec::new();
    let mut wall = 0.0f64;
    let mut counts: Option<(u64, u64)> = None; // rows, verdicts

    // warm-up pass first (pass 0), excluded from every aggregate
    for pass in 0..=repetitions {
        let timed = pass > 0;
        let mut tracker = Tracker::new(tracker_config.clone())?;
        let mut engine = IdleEngine::new(model, idle_config)?;
        let mut rows = 0u64;
        let mut verdicts = 0u64;
        let pass_started = Instant::now();
        for (frame, dets) in frames {
            let t0 = Instant::now();
            let outputs = tracker.step(dets, *frame)?;
            let t1 = Instant::now();
            for o in &outputs {
                if engine.push(o.track_id, &o.bbox, *frame)?.is_some() {
                    verdicts += 1;
                }
            }
            for id in tracker.drain_terminated() {
                engine.discard(id);
            }
            let t2 = Instant::now();
            rows += outputs.len() as u64;
            if timed {
                tracker_samples.push((t1 - t0).as_secs_f64() * 1e3);
                idle_samples.push((t2 - t1).as_secs_f64() * 1e3);
                total_samples.push((t2 - t0).as_secs_f64() * 1e3);
            }
        }
        if timed {
            wall += pass_started.elapsed().as_secs_f64();
        }
        match counts {
            None => counts = Some((rows, verdicts)),
            Some(prev) => {
                if prev != (rows, verdicts) {
                    return Err(Error::Internal(format!(
                        "pass {pass} produced {rows} rows / {verdicts} verdicts, expected {prev:?}"
                    )));
                }
            }
        }
    }

    let (rows, verdicts) = counts.expect("at least one pass");
    let frames_processed = frames.len() as u64;
    let detections = frames.iter().map(|(_, d)| d.len() as u64).sum();
    let wall_time_s =
        if include_parse { wall / repetitions as f64 + parse_time_s } else { wall / repetitions as f64 };
    let video_duration_s = frames_processed as f64 / idle_config.fps;
    let throughput_fps = frames_processed as f64 / wall_time_s;
    Ok(BenchReport {
        frames_processed,
        detections_ingested: detections,
        rows_emitted: rows,
        verdicts_emitted: verdicts,
        repetitions,
        wall_time_s,
        parse_time_s,
        parse_included: include_parse,
        throughput_fps,
        tracker: LatencyStats::from_samples(&mut tracker_samples),
        idle: LatencyStats::from_samples(&mut idle_samples),
        frame_total: LatencyStats::from_samples(&mut total_samples),
        video_duration_s,
        speed_factor: wall_time_s / video_duration_s,
        processing_time_s: processing_time_accounting(video_duration_s, throughput_fps),
    })
}

pub fn render_bench_table(r: &BenchReport) -> String {
    let mut out = String::new();
    let mut row = |k: &str, v: String| out.push_str(&format!("{k:<28}  {v}\n"));
    row("Frames Processed", r.frames_processed.to_string());
    row("Detections Ingested", r.detections_ingested.to_string());
    row("Rows Emitted", r.rows_emitted.to_string());
    row("Verdicts Emitted", r.verdicts_emitted.to_string());
    row("Repetitions", r.repetitions.to_string());
    row("Parse Time (s)", format!("{:.4}{}", r.parse_time_s, if r.parse_included { " (included)" } else { " (excluded)" }));
    row("Wall Time (s)", format!("{:.4}", r.wall_time_s));
    row("Throughput (FPS)", format!("{:.2}", r.throughput_fps));
    row("Video Duration (s)", format!("{:.2}", r.video_duration_s));
    row("Speed Factor (wall/video)", format!("{:.4}", r.speed_factor));
    row("Processing Time (s)", format!("{:.2} ({:.0}/{:.1})", r.processing_time_s, r.video_duration_s, r.throughput_fps));
    for (name, s) in [("Tracker", &r.tracker), ("Idle", &r.idle), ("Frame Total", &r.frame_total)] {
        row(
            &format!("{name} Latency (ms)"),
            format!(
                "mean {:.4}  min {:.4}  max {:.4}  p95 {:.4}",
                s.mean_ms, s.min_ms, s.max_ms, s.p95_ms
            ),
        );
    }
    out
}
