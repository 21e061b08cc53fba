//! File formats crossing the pipeline boundary.
//!
//! - detections: one JSON object per line, ordered by frame (streamed)
//! - tracks: CSV with a `# tracks v1` version line and fixed 6-decimal reals
//! - model / scenario / pipeline config: TOML with a `version` field
//! - evaluation report: JSON plus an aligned plain-text table
//!
//! Writers emit canonical bytes (`write . read . write == write`); readers
//! reject trailing garbage and report line numbers.

mod config;
mod detections;
mod model_file;
mod report;
mod scenario;
mod tracks;
mod truth;
mod windows;

pub use config::{
    read_config, read_config_str, write_config, EvalConfig, IdleSection, PipelineConfig,
};
pub use detections::{read_detections, write_detections, DetectionReader};
pub use model_file::{read_model, read_model_str, write_model, ModelFile};
pub use report::{render_report_table, EvalReport};
pub use scenario::{read_scenario, read_scenario_str, write_scenario};
pub use tracks::{read_tracks, write_tracks, RecordState, TrackReader, TrackRecord, TrackWriter};
pub use truth::{read_truth, write_truth};
pub use windows::{read_windows, read_windows_from, write_windows, LabeledWindow};
