//! Track output: versioned CSV with fixed 6-decimal reals.
//!
//! ```text
//! # tracks v1
//! frame,track_id,class_id,x,y,w,h,confidence,state,p
//! 0,1,0,10.000000,20.000000,30.000000,40.000000,0.900000,ACTIVE_UNKNOWN,
//! 15,1,0,10.000000,20.000000,30.000000,40.000000,0.900000,IDLE,0.921400
//! ```
//!
//! `state` is the idle verdict covering the row's frame; rows no verdict
//! covers carry `ACTIVE_UNKNOWN` and an empty `p`.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::idle::MachineState;

pub const TRACKS_VERSION: u32 = 1;
const HEADER: &str = "frame,track_id,class_id,x,y,w,h,confidence,state,p";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordState {
    /// Track is active but no idle verdict covers this frame.
    ActiveUnknown,
    Idle,
    Active,
}

impl RecordState {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordState::ActiveUnknown => "ACTIVE_UNKNOWN",
            RecordState::Idle => "IDLE",
            RecordState::Active => "ACTIVE",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "ACTIVE_UNKNOWN" => Some(RecordState::ActiveUnknown),
            "IDLE" => Some(RecordState::Idle),
            "ACTIVE" => Some(RecordState::Active),
            _ => None,
        }
    }
}

impl From<MachineState> for RecordState {
    fn from(s: MachineState) -> Self {
        match s {
            MachineState::Idle => RecordState::Idle,
            MachineState::Active => RecordState::Active,
        }
    }
}

/// One row of a track file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackRecord {
    pub frame: u64,
    pub track_id: u64,
    pub class_id: u32,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub confidence: f64,
    pub state: RecordState,
    pub p: Option<f64>,
}

impl TrackRecord {
    fn to_line(&self) -> String {
        let p = match self.p {
            Some(v) => format!("{v:.6}"),
            None => String::new(),
        };
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
            self.frame,
            self.track_id,
            self.class_id,
            self.x,
            self.y,
            self.w,
            self.h,
            self.confidence,
            self.state.as_str(),
            p
        )
    }

    fn parse(line: &str, line_no: usize) -> Result<Self> {
        let err = |message: String| Error::Parse { line: line_no, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(err(format!("expected 10 columns, got {}", fields.len())));
        }
        let parse_u64 = |s: &str, what: &str| {
            s.parse::<u64>().map_err(|_| err(format!("bad {what}: {s:?}")))
        };
        let parse_f64 = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad {what}: {s:?}")))
        };
        let state = RecordState::parse(fields[8])
            .ok_or_else(|| err(format!("bad state: {:?}", fields[8])))?;
        let p = if fields[9].is_empty() {
            None
        } else {
            let v = parse_f64(fields[9], "p")?;
            if !(0.0..=1.0).contains(&v) {
                return Err(err(format!("p out of range: {v}")));
            }
            Some(v)
        };
        let confidence = parse_f64(fields[7], "confidence")?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(err(format!("confidence out of range: {confidence}")));
        }
        Ok(TrackRecord {
            frame: parse_u64(fields[0], "frame")?,
            track_id: parse_u64(fields[1], "track_id")?,
            class_id: fields[2].parse().map_err(|_| err(format!("bad class_id: {:?}", fields[2])))?,
            x: parse_f64(fields[3], "x")?,
            y: parse_f64(fields[4], "y")?,
            w: parse_f64(fields[5], "w")?,
            h: parse_f64(fields[6], "h")?,
            confidence,
            state,
            p,
        })
    }
}

/// Incremental writer; emits the version line and header up front.
pub struct TrackWriter<W: Write> {
    out: W,
}

impl<W: Write> TrackWriter<W> {
    pub fn new(mut out: W) -> Result<Self> {
        writeln!(out, "# tracks v{TRACKS_VERSION}")?;
        writeln!(out, "{HEADER}")?;
        Ok(TrackWriter { out })
    }

    pub fn write(&mut self, rec: &TrackRecord) -> Result<()> {
        writeln!(self.out, "{}", rec.to_line())?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Streaming reader over a track file.
pub struct TrackReader<R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: usize,
    header_seen: bool,
    version_seen: bool,
    last_frame: Option<u64>,
}

impl TrackReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Ok(TrackReader::new(BufReader::new(File::open(path)?)))
    }
}

impl<R: BufRead> TrackReader<R> {
    pub fn new(reader: R) -> Self {
        TrackReader {
            lines: reader.lines(),
            line_no: 0,
            header_seen: false,
            version_seen: false,
            last_frame: None,
        }
    }

    fn handle(&mut self, line: &str) -> Result<Option<TrackRecord>> {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            return Ok(None);
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("tracks v") {
                let found: u32 = rest.trim().parse().map_err(|_| Error::Parse {
                    line: self.line_no,
                    message: format!("bad version comment {trimmed:?}"),
                })?;
                if found != TRACKS_VERSION {
                    return Err(Error::VersionMismatch {
                        format: "tracks",
                        found,
                        expected: TRACKS_VERSION,
                    });
                }
                self.version_seen = true;
            }
            return Ok(None);
        }
        if !self.version_seen {
            return Err(Error::Parse {
                line: self.line_no,
                message: "missing `# tracks v1` version line".to_string(),
            });
        }
        if !self.header_seen {
            if trimmed != HEADER {
                return Err(Error::Parse {
                    line: self.line_no,
                    message: format!("expected header {HEADER:?}"),
                });
            }
            self.header_seen = true;
            return Ok(None);
        }
        let rec = TrackRecord::parse(trimmed, self.line_no)?;
        if let Some(prev) = self.last_frame {
            if rec.frame < prev {
                return Err(Error::Parse {
                    line: self.line_no,
                    message: format!("frame {} after frame {prev}", rec.frame),
                });
            }
        }
        self.last_frame = Some(rec.frame);
        Ok(Some(rec))
    }
}

impl<R: BufRead> Iterator for TrackReader<R> {
    type Item = Result<TrackRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            match self.handle(&line) {
                Ok(Some(rec)) => return Some(Ok(rec)),
                Ok(None) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

pub fn read_tracks(path: impl AsRef<Path>) -> Result<Vec<TrackRecord>> {
    TrackReader::open(path)?.collect()
}

pub fn write_tracks<'a, W: Write>(
    out: W,
    records: impl IntoIterator<Item = &'a TrackRecord>,
) -> Result<()> {
    let mut w = TrackWriter::new(out)?;
    for r in records {
        w.write(r)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn read_str(s: &str) -> Result<Vec<TrackRecord>> {
        TrackReader::new(s.as_bytes()).collect()
    }

    fn write_str(records: &[TrackRecord]) -> String {
        let mut buf = Vec::new();
        write_tracks(&mut buf, records).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn canonical_serialization_is_idempotent() {
        // write . read . write == write over random records
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut records = Vec::new();
        let mut frame = 0u64;
        for _ in 0..10_000 {
            frame += rng.random_range(0..2);
            let state = match rng.random_range(0..3) {
                0 => RecordState::ActiveUnknown,
                1 => RecordState::Idle,
                _ => RecordState::Active,
            };
            records.push(TrackRecord {
                frame,
                track_id: rng.random_range(1..50),
                class_id: rng.random_range(0..3),
                x: rng.random_range(-100.0..600.0),
                y: rng.random_range(-100.0..600.0),
                w: rng.random_range(0.1..300.0),
                h: rng.random_range(0.1..300.0),
                confidence: rng.random_range(0.0..1.0),
                state,
                p: if state == RecordState::ActiveUnknown {
                    None
                } else {
                    Some(rng.random_range(0.0..1.0))
                },
            });
        }
        let first = write_str(&records);
        let reread: Vec<TrackRecord> = read_str(&first).unwrap();
        let second = write_str(&reread);
        assert_eq!(first, second);
    }

    #[test]
    fn reals_have_six_decimals() {
        let rec = TrackRecord {
            frame: 0,
            track_id: 1,
            class_id: 0,
            x: 1.0 / 3.0,
            y: 2.0,
            w: 3.0,
            h: 4.0,
            confidence: 0.5,
            state: RecordState::Idle,
            p: Some(0.9214),
        };
        let text = write_str(&[rec]);
        assert!(text.contains("0.333333,2.000000,3.000000,4.000000,0.500000,IDLE,0.921400"));
    }

    #[test]
    fn missing_version_line_is_an_error() {
        let text = format!("{HEADER}\n0,1,0,1.0,1.0,1.0,1.0,0.5,IDLE,0.5\n");
        assert!(matches!(read_str(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn wrong_version_is_explicit() {
        let text = "# tracks v7\n";
        assert!(matches!(
            read_str(text),
            Err(Error::VersionMismatch { format: "tracks", found: 7, expected: 1 })
        ));
    }

    #[test]
    fn malformed_rows_name_their_line() {
        let good = "0,1,0,1.000000,1.000000,1.000000,1.000000,0.500000,IDLE,0.500000";
        let text = format!("# tracks v1\n{HEADER}\n{good}\n0,1,0,oops\n");
        assert!(matches!(read_str(&text), Err(Error::Parse { line: 4, .. })));

        let text = format!("# tracks v1\n{HEADER}\n0,1,0,1.0,1.0,1.0,1.0,0.5,NOT_A_STATE,\n");
        assert!(matches!(read_str(&text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn frames_must_be_ordered() {
        let a = "5,1,0,1.000000,1.000000,1.000000,1.000000,0.500000,ACTIVE_UNKNOWN,";
        let b = "4,1,0,1.000000,1.000000,1.000000,1.000000,0.500000,ACTIVE_UNKNOWN,";
        let text = format!("# tracks v1\n{HEADER}\n{a}\n{b}\n");
        assert!(matches!(read_str(&text), Err(Error::Parse { line: 4, .. })));
    }
}
