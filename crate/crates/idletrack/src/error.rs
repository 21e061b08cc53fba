use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a domain invariant (bad bbox, confidence out of range, ...).
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    /// Frames arrived out of order on a stateful stream.
    #[error("stream ordering violated: frame {frame} after frame {previous}")]
    StreamOrder { frame: u64, previous: u64 },

    /// A (track, frame) observation was pushed twice.
    #[error("duplicate observation for track {track} at frame {frame}")]
    DuplicateObservation { track: u64, frame: u64 },

    /// A window/series was too short for the requested statistic.
    #[error("insufficient window: need at least {need} entries, got {got}")]
    InsufficientWindow { need: usize, got: usize },

    /// Training data cannot identify a model (e.g. only one class present).
    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    /// An evaluation was requested over an empty join.
    #[error("empty evaluation: {0}")]
    EmptyEvaluation(String),

    /// A measurement contained NaN or infinity.
    #[error("non-finite measurement: {0}")]
    NonFiniteMeasurement(String),

    /// A line of an input file failed to parse or validate.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A file declared a schema version this build does not speak.
    #[error("unsupported {format} schema version {found} (expected {expected})")]
    VersionMismatch {
        format: &'static str,
        found: u32,
        expected: u32,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// An internal invariant was breached; always a bug.
    #[error("internal invariant breached: {0}")]
    Internal(String),
}

impl Error {
    pub fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            why: why.into(),
        }
    }

    /// True for errors caused by bad user input rather than runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid { .. }
                | Error::Parse { .. }
                | Error::VersionMismatch { .. }
                | Error::InsufficientWindow { .. }
                | Error::DegenerateTraining(_)
                | Error::EmptyEvaluation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
