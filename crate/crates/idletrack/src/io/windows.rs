//! Labeled training windows: CSV consumed by model fitting.
//!
//! ```text
//! # windows v1
//! mad_ad,mad_cd,n,label
//! 0.000000,0.120000,15,IDLE
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::idle::{MachineState, WindowFeatures};

pub const WINDOWS_VERSION: u32 = 1;
const HEADER: &str = "mad_ad,mad_cd,n,label";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledWindow {
    pub features: WindowFeatures,
    pub label: MachineState,
}

pub fn write_windows<'a, W: Write>(
    mut out: W,
    windows: impl IntoIterator<Item = &'a LabeledWindow>,
) -> Result<()> {
    writeln!(out, "# windows v{WINDOWS_VERSION}")?;
    writeln!(out, "{HEADER}")?;
    for w in windows {
        let label = match w.label {
            MachineState::Idle => "IDLE",
            MachineState::Active => "ACTIVE",
        };
        writeln!(
            out,
            "{:.6},{:.6},{},{}",
            w.features.mad_ad, w.features.mad_cd, w.features.n, label
        )?;
    }
    Ok(())
}

pub fn read_windows(path: impl AsRef<Path>) -> Result<Vec<LabeledWindow>> {
    read_windows_from(BufReader::new(File::open(path)?))
}

pub fn read_windows_from<R: BufRead>(reader: R) -> Result<Vec<LabeledWindow>> {
    let mut windows = Vec::new();
    let mut header_seen = false;
    let mut version_seen = false;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("windows v") {
                let found: u32 = rest.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad version comment {trimmed:?}"),
                })?;
                if found != WINDOWS_VERSION {
                    return Err(Error::VersionMismatch {
                        format: "windows",
                        found,
                        expected: WINDOWS_VERSION,
                    });
                }
                version_seen = true;
            }
            continue;
        }
        if !version_seen {
            return Err(Error::Parse {
                line: line_no,
                message: "missing `# windows v1` version line".to_string(),
            });
        }
        if !header_seen {
            if trimmed != HEADER {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header {HEADER:?}"),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 4 columns, got {}", fields.len()),
            });
        }
        let parse_f64 = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("bad {what}: {s:?}"),
                })
        };
        let label = match fields[3] {
            "IDLE" => MachineState::Idle,
            "ACTIVE" => MachineState::Active,
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("bad label: {other:?}"),
                })
            }
        };
        windows.push(LabeledWindow {
            features: WindowFeatures {
                mad_ad: parse_f64(fields[0], "mad_ad")?,
                mad_cd: parse_f64(fields[1], "mad_cd")?,
                n: fields[2].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad n: {:?}", fields[2]),
                })?,
            },
            label,
        });
    }
    Ok(windows)
}
