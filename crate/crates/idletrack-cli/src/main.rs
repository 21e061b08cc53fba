//! `idletrack`: detection-stream tracking and idle-state classification
//! for construction machinery, with a scenario simulator, evaluation
//! harness, and benchmark.
//!
//! Exit codes: 0 success, 1 input/validation error, 2 runtime error,
//! 3 internal invariant breach.

mod bench;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use idletrack::detection::Detection;
use idletrack::error::{Error, Result};
use idletrack::eval::{
    detection_prf, idle_metrics, mot_metrics, track_owners, IdleOutcome, MotReport,
};
use idletrack::fit::{fit_model, FitOptions};
use idletrack::idle::{IdleConfig, IdleModel, MachineState};
use idletrack::io::{
    read_config, read_detections, read_model, read_scenario, read_tracks, read_truth,
    read_windows, render_report_table, write_detections, write_model, write_truth, write_windows,
    DetectionReader, EvalReport, PipelineConfig, RecordState, TrackReader, TrackRecord,
    TrackWriter,
};
use idletrack::pipeline::{labeled_windows, FrameBatches, Pipeline, VerdictAnnotator};
use idletrack::simulator::generate;
use idletrack::tracker::{TrackedObject, Tracker};
use idletrack::{BBox, ClassLabel, TrackId};

#[derive(Parser)]
#[command(name = "idletrack", version, about = "Track construction machinery in detection streams and classify idle state")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Pipeline config file (TOML).
    #[arg(long, global = true, env = "IDLETRACK_CONFIG")]
    config: Option<PathBuf>,

    /// Scenario seed override (simulate only).
    #[arg(long, global = true, env = "IDLETRACK_SEED")]
    seed: Option<u64>,

    /// Idle model file; overrides the config's model reference.
    #[arg(long, global = true, env = "IDLETRACK_MODEL")]
    model: Option<PathBuf>,

    /// Idle window capacity override.
    #[arg(long, global = true, env = "IDLETRACK_BUFFER")]
    buffer: Option<usize>,

    /// Stream FPS override.
    #[arg(long, global = true, env = "IDLETRACK_FPS")]
    fps: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelArg {
    Idle,
    Active,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a detection stream and ground truth from a scenario file.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out_detections: PathBuf,
        #[arg(long)]
        out_truth: PathBuf,
        /// Also extract oracle-labeled feature windows for training.
        #[arg(long)]
        out_windows: Option<PathBuf>,
    },
    /// Track a detection stream; no idle classification.
    Track {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Annotate an existing track file with idle verdicts.
    ///
    /// Features are computed from the file's 6-decimal box coordinates,
    /// so `p` can differ in its last digit from a single `pipeline` pass.
    Idle {
        #[arg(long)]
        tracks: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Track and classify in one streaming pass.
    Pipeline {
        /// One or more detection files; each is an independent stream.
        #[arg(long, num_args = 1.., required = true)]
        detections: Vec<PathBuf>,
        /// Output track file (single input only).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output directory; writes <input-stem>.tracks.csv per input.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Process streams on parallel threads.
        #[arg(long)]
        parallel: bool,
    },
    /// Fit logistic coefficients from a labeled windows file.
    Fit {
        #[arg(long)]
        windows: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Which class p is the probability of.
        #[arg(long, value_enum, default_value = "idle")]
        positive_label: LabelArg,
    },
    /// Score a track file against ground truth.
    Eval {
        #[arg(long)]
        tracks: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Also score raw detections against the ground truth.
        #[arg(long)]
        detections: Option<PathBuf>,
        /// Write the structured report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Measure tracker+idle throughput and per-stage latency.
    Bench {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long, default_value_t = 3)]
        repetitions: u32,
        /// Count file parsing in the wall time.
        #[arg(long)]
        include_parse: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// Flags > model file > config file > defaults.
struct Settings {
    config: PipelineConfig,
    model: IdleModel,
    idle: IdleConfig,
}

fn resolve(cli: &Cli) -> Result<Settings> {
    let config = match &cli.config {
        Some(path) => read_config(path)?,
        None => PipelineConfig::default(),
    };
    let model_path = cli.model.clone().or_else(|| config.idle.model.clone());
    let (model, mut idle) = match model_path {
        Some(path) => read_model(path)?,
        None => (
            IdleModel::default(),
            IdleConfig {
                capacity: config.idle.capacity,
                fps: config.idle.fps,
                mad_variant: config.idle.mad_variant,
            },
        ),
    };
    if let Some(buffer) = cli.buffer {
        idle.capacity = buffer;
    }
    if let Some(fps) = cli.fps {
        idle.fps = fps;
    }
    idle.validate()?;
    Ok(Settings { config, model, idle })
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version displays are successes, usage errors are not
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            let code = match &e {
                Error::Internal(_) => 3,
                Error::Io(_) => 2,
                _ => 1,
            };
            std::process::exit(code);
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let settings = resolve(&cli)?;
    match &cli.command {
        Command::Simulate { scenario, out_detections, out_truth, out_windows } => {
            cmd_simulate(&cli, &settings, scenario, out_detections, out_truth, out_windows.as_deref())
        }
        Command::Track { detections, out } => cmd_track(&settings, detections, out),
        Command::Idle { tracks, out } => cmd_idle(&settings, tracks, out),
        Command::Pipeline { detections, out, out_dir, parallel } => {
            cmd_pipeline(&settings, detections, out.as_deref(), out_dir.as_deref(), *parallel)
        }
        Command::Fit { windows, out, positive_label } => {
            cmd_fit(&settings, windows, out, *positive_label)
        }
        Command::Eval { tracks, truth, detections, report } => {
            cmd_eval(&settings, tracks, truth, detections.as_deref(), report.as_deref())
        }
        Command::Bench { detections, repetitions, include_parse, report } => {
            cmd_bench(&settings, detections, *repetitions, *include_parse, report.as_deref())
        }
    }
}

fn cmd_simulate(
    cli: &Cli,
    settings: &Settings,
    scenario: &Path,
    out_detections: &Path,
    out_truth: &Path,
    out_windows: Option<&Path>,
) -> Result<()> {
    let mut spec = read_scenario(scenario)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let (detections, truth) = generate(&spec)?;

    let mut out = BufWriter::new(File::create(out_detections)?);
    write_detections(&mut out, detections.iter())?;
    out.flush()?;
    write_truth(out_truth, &truth)?;

    if let Some(path) = out_windows {
        let windows = labeled_windows(
            &spec,
            &settings.config.tracker,
            &settings.idle,
            settings.config.eval.iou_match,
            settings.config.eval.eps_v,
        )?;
        let mut out = BufWriter::new(File::create(path)?);
        write_windows(&mut out, windows.iter())?;
        out.flush()?;
        eprintln!("wrote {} labeled windows", windows.len());
    }
    eprintln!(
        "simulated {} frames, {} detections, {} machines",
        truth.frames.len(),
        detections.len(),
        truth.entity_count()
    );
    Ok(())
}

fn cmd_track(settings: &Settings, detections: &Path, out: &Path) -> Result<()> {
    let reader = DetectionReader::open(detections)?;
    let mut tracker = Tracker::new(settings.config.tracker.clone())?;
    let mut writer = TrackWriter::new(BufWriter::new(File::create(out)?))?;
    for batch in FrameBatches::new(reader) {
        let (frame, dets) = batch?;
        for o in tracker.step(&dets, frame)? {
            writer.write(&TrackRecord {
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
            })?;
        }
    }
    writer.into_inner().flush()?;
    Ok(())
}

fn cmd_idle(settings: &Settings, tracks: &Path, out: &Path) -> Result<()> {
    let reader = TrackReader::open(tracks)?;
    let mut annotator = VerdictAnnotator::new(settings.model, settings.idle)?;
    let mut writer = TrackWriter::new(BufWriter::new(File::create(out)?))?;
    for record in reader {
        for row in annotator.push_row(record?)? {
            writer.write(&row)?;
        }
    }
    for row in annotator.finish() {
        writer.write(&row)?;
    }
    writer.into_inner().flush()?;
    Ok(())
}

fn run_one_pipeline(settings: &Settings, detections: &Path, out: &Path) -> Result<()> {
    let reader = DetectionReader::open(detections)?;
    let mut pipeline =
        Pipeline::new(settings.config.tracker.clone(), settings.model, settings.idle)?;
    let mut writer = TrackWriter::new(BufWriter::new(File::create(out)?))?;
    for batch in FrameBatches::new(reader) {
        let (frame, dets) = batch?;
        for row in pipeline.step(&dets, frame)? {
            writer.write(&row)?;
        }
    }
    for row in pipeline.finish() {
        writer.write(&row)?;
    }
    writer.into_inner().flush()?;
    Ok(())
}

fn cmd_pipeline(
    settings: &Settings,
    detections: &[PathBuf],
    out: Option<&Path>,
    out_dir: Option<&Path>,
    parallel: bool,
) -> Result<()> {
    let jobs: Vec<(PathBuf, PathBuf)> = match (detections, out, out_dir) {
        ([single], Some(out), None) => vec![(single.clone(), out.to_path_buf())],
        (many, None, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            many.iter()
                .map(|input| {
                    let stem = input
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "stream".to_string());
                    (input.clone(), dir.join(format!("{stem}.tracks.csv")))
                })
                .collect()
        }
        _ => {
            return Err(Error::invalid(
                "pipeline arguments",
                "use --out with a single input, or --out-dir with one or more inputs",
            ))
        }
    };

    if parallel && jobs.len() > 1 {
        // independent streams share nothing; one thread each
        std::thread::scope(|scope| {
            let handles: Vec<_> = jobs
                .iter()
                .map(|(input, output)| {
                    scope.spawn(move || run_one_pipeline(settings, input, output))
                })
                .collect();
            for handle in handles {
                handle.join().map_err(|_| Error::Internal("worker panicked".to_string()))??;
            }
            Ok(())
        })
    } else {
        for (input, output) in &jobs {
            run_one_pipeline(settings, input, output)?;
        }
        Ok(())
    }
}

fn cmd_fit(settings: &Settings, windows: &Path, out: &Path, label: LabelArg) -> Result<()> {
    let windows = read_windows(windows)?;
    let pairs: Vec<_> = windows.iter().map(|w| (w.features, w.label)).collect();
    let opts = FitOptions {
        positive_label: match label {
            LabelArg::Idle => MachineState::Idle,
            LabelArg::Active => MachineState::Active,
        },
        ..Default::default()
    };
    let model = fit_model(&pairs, &opts)?;
    let hits = pairs.iter().filter(|(f, l)| model.classify(f).1 == *l).count();
    write_model(out, &model, &settings.idle)?;
    eprintln!(
        "fitted on {} windows, training accuracy {:.4}; beta = ({:.6}, {:.6}, {:.6})",
        pairs.len(),
        hits as f64 / pairs.len() as f64,
        model.beta0,
        model.beta1,
        model.beta2
    );
    Ok(())
}

/// Rebuilds per-window verdict spans from an annotated track file: each
/// track's classified rows, in order, chunk into windows of `capacity`.
fn windows_from_rows(
    rows: &[TrackRecord],
    capacity: usize,
) -> Result<Vec<(TrackId, u64, u64, MachineState)>> {
    let mut per_track: std::collections::BTreeMap<u64, Vec<&TrackRecord>> =
        std::collections::BTreeMap::new();
    for row in rows {
        if row.state != RecordState::ActiveUnknown {
            per_track.entry(row.track_id).or_default().push(row);
        }
    }
    let mut windows = Vec::new();
    for (track_id, rows) in per_track {
        for chunk in rows.chunks(capacity) {
            if chunk.len() < capacity {
                return Err(Error::invalid(
                    "track file",
                    format!(
                        "track {track_id} has {} classified rows, not a multiple of the window capacity {capacity}; evaluate with the capacity the file was produced with",
                        rows.len()
                    ),
                ));
            }
            let state = match chunk[0].state {
                RecordState::Idle => MachineState::Idle,
                RecordState::Active => MachineState::Active,
                RecordState::ActiveUnknown => unreachable!("filtered above"),
            };
            if chunk.iter().any(|r| r.state != chunk[0].state) {
                return Err(Error::invalid(
                    "track file",
                    format!("track {track_id} changes state inside one window"),
                ));
            }
            windows.push((
                TrackId(track_id),
                chunk[0].frame,
                chunk[chunk.len() - 1].frame,
                state,
            ));
        }
    }
    Ok(windows)
}

fn tracked_objects_from_rows(rows: &[TrackRecord]) -> Result<Vec<TrackedObject>> {
    rows.iter()
        .map(|r| {
            Ok(TrackedObject {
                frame: r.frame,
                track_id: TrackId(r.track_id),
                class: ClassLabel::from_id(r.class_id),
                bbox: BBox::new(r.x, r.y, r.w, r.h)?,
                confidence: r.confidence,
            })
        })
        .collect()
}

fn cmd_eval(
    settings: &Settings,
    tracks: &Path,
    truth: &Path,
    detections: Option<&Path>,
    report_path: Option<&Path>,
) -> Result<()> {
    let rows = read_tracks(tracks)?;
    let gt = read_truth(truth)?;
    let tracked = tracked_objects_from_rows(&rows)?;
    let eval_cfg = settings.config.eval;

    let mot: MotReport = mot_metrics(&tracked, &gt, eval_cfg.iou_match);

    let windows = windows_from_rows(&rows, settings.idle.capacity)?;
    let idle = if windows.is_empty() {
        None
    } else {
        let owners = track_owners(&tracked, &gt, eval_cfg.iou_match);
        let outcomes: Vec<IdleOutcome> = windows
            .iter()
            .map(|(track_id, first, last, predicted)| {
                let truth_label = owners.get(track_id).copied().flatten().map(|entity| {
                    gt.window_idle_label(entity, *first, *last, eval_cfg.eps_v)
                });
                IdleOutcome { predicted: *predicted, truth: truth_label }
            })
            .collect();
        Some(idle_metrics(&outcomes)?)
    };

    let detection = match detections {
        Some(path) => Some(detection_prf(&read_detections(path)?, &gt, eval_cfg.iou_match)),
        None => None,
    };

    let report = EvalReport::new(idle, Some(mot), detection);
    print!("{}", render_report_table(&report));
    if let Some(path) = report_path {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, &report)
            .map_err(|e| Error::Internal(e.to_string()))?;
        out.flush()?;
    }
    Ok(())
}

fn cmd_bench(
    settings: &Settings,
    detections: &Path,
    repetitions: u32,
    include_parse: bool,
    report_path: Option<&Path>,
) -> Result<()> {
    let parse_started = Instant::now();
    let reader = DetectionReader::open(detections)?;
    let frames: Vec<(u64, Vec<Detection>)> =
        FrameBatches::new(reader).collect::<Result<Vec<_>>>()?;
    let parse_time_s = parse_started.elapsed().as_secs_f64();

    let report = bench::run_bench(
        &frames,
        &settings.config.tracker,
        settings.model,
        settings.idle,
        repetitions,
        parse_time_s,
        include_parse,
    )?;
    print!("{}", bench::render_bench_table(&report));
    if let Some(path) = report_path {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, &report)
            .map_err(|e| Error::Internal(e.to_string()))?;
        out.flush()?;
    }
    Ok(())
}
