//! Ground-truth file: JSON wrapper around the simulator output.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::GroundTruth;

pub const TRUTH_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct TruthFile {
    version: u32,
    #[serde(flatten)]
    truth: GroundTruth,
}

pub fn write_truth(path: impl AsRef<Path>, truth: &GroundTruth) -> Result<()> {
    let file = File::create(path)?;
    serde_json::to_writer(
        BufWriter::new(file),
        &TruthFile { version: TRUTH_VERSION, truth: truth.clone() },
    )
    .map_err(|e| Error::Internal(e.to_string()))?;
    Ok(())
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let file = File::open(path)?;
    let parsed: TruthFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::invalid("ground truth file", e.to_string()))?;
    if parsed.version != TRUTH_VERSION {
        return Err(Error::VersionMismatch {
            format: "truth",
            found: parsed.version,
            expected: TRUTH_VERSION,
        });
    }
    Ok(parsed.truth)
}
