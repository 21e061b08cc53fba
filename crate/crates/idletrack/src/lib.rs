//! Detection-stream tracking and idle-state classification for
//! construction machinery, plus the simulator and metrics needed to
//! score both without real footage.
//!
//! The crate is organized around the stream path: detections come in
//! ([`io`]), get associated into tracks ([`tracker`]), each track's box
//! variability is windowed and classified ([`idle`]), and rows go back
//! out as track records. [`simulator`] fabricates labeled scenarios and
//! [`eval`] scores runs against them.

pub mod assignment;
pub mod bbox;
pub mod detection;
pub mod error;
pub mod eval;
pub mod fit;
pub mod idle;
pub mod io;
pub mod kalman;
pub mod pipeline;
pub mod simulator;
pub mod tracker;

pub use bbox::BBox;
pub use detection::{ClassLabel, Detection, TrackId};
pub use error::{Error, Result};
pub use idle::{IdleConfig, IdleEngine, IdleModel, IdleVerdict, MachineState, MadVariant};
pub use tracker::{Tracker, TrackerConfig, TrackedObject};
