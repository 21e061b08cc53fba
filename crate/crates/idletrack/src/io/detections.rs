//! Detection stream: one JSON object per line.
//!
//! `{"frame":0,"cls":0,"conf":0.9,"x":10.0,"y":20.0,"w":30.0,"h":40.0}`
//!
//! Lines starting with `#` are comments; a `# detections v<N>` comment is
//! treated as a schema version and checked. Frames must be non-decreasing.
//! Reading is streaming: memory stays at one record regardless of file
//! size.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bbox::BBox;
use crate::detection::{ClassLabel, Detection};
use crate::error::{Error, Result};

pub const DETECTIONS_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionLine {
    frame: u64,
    cls: u32,
    conf: f64,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

/// Streaming reader over a detection file.
pub struct DetectionReader<R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: usize,
    last_frame: Option<u64>,
}

impl DetectionReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Ok(DetectionReader::new(BufReader::new(File::open(path)?)))
    }
}

impl<R: BufRead> DetectionReader<R> {
    pub fn new(reader: R) -> Self {
        DetectionReader { lines: reader.lines(), line_no: 0, last_frame: None }
    }

    fn parse(&mut self, line: &str) -> Result<Option<Detection>> {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            return Ok(None);
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("detections v") {
                let found: u32 = rest.trim().parse().map_err(|_| Error::Parse {
                    line: self.line_no,
                    message: format!("bad version comment {trimmed:?}"),
                })?;
                if found != DETECTIONS_VERSION {
                    return Err(Error::VersionMismatch {
                        format: "detections",
                        found,
                        expected: DETECTIONS_VERSION,
                    });
                }
            }
            return Ok(None);
        }

        let rec: DetectionLine = serde_json::from_str(trimmed).map_err(|e| Error::Parse {
            line: self.line_no,
            message: e.to_string(),
        })?;
        if let Some(prev) = self.last_frame {
            if rec.frame < prev {
                return Err(Error::Parse {
                    line: self.line_no,
                    message: format!("frame {} after frame {prev}: stream must be frame-ordered", rec.frame),
                });
            }
        }
        self.last_frame = Some(rec.frame);

        let bbox = BBox::new(rec.x, rec.y, rec.w, rec.h).map_err(|e| Error::Parse {
            line: self.line_no,
            message: e.to_string(),
        })?;
        let det = Detection::new(rec.frame, bbox, rec.conf, ClassLabel::from_id(rec.cls))
            .map_err(|e| Error::Parse { line: self.line_no, message: e.to_string() })?;
        Ok(Some(det))
    }
}

impl<R: BufRead> Iterator for DetectionReader<R> {
    type Item = Result<Detection>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            match self.parse(&line) {
                Ok(Some(det)) => return Some(Ok(det)),
                Ok(None) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

/// Convenience: read a whole file into memory.
pub fn read_detections(path: impl AsRef<Path>) -> Result<Vec<Detection>> {
    DetectionReader::open(path)?.collect()
}

/// Writes the stream with a version comment first.
pub fn write_detections<'a, W: Write>(
    out: &mut W,
    detections: impl IntoIterator<Item = &'a Detection>,
) -> Result<()> {
    writeln!(out, "# detections v{DETECTIONS_VERSION}")?;
    for d in detections {
        let line = DetectionLine {
            frame: d.frame,
            cls: d.class.id,
            conf: d.confidence,
            x: d.bbox.x,
            y: d.bbox.y,
            w: d.bbox.w,
            h: d.bbox.h,
        };
        writeln!(out, "{}", serde_json::to_string(&line).expect("plain struct"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read_str(s: &str) -> Result<Vec<Detection>> {
        DetectionReader::new(s.as_bytes()).collect()
    }

    #[test]
    fn empty_file_is_empty_sequence() {
        assert_eq!(read_str("").unwrap(), vec![]);
        assert_eq!(read_str("\n\n").unwrap(), vec![]);
    }

    #[test]
    fn single_line_round_trips() {
        let d = Detection::new(
            3,
            BBox::new(10.5, 20.25, 30.0, 40.0).unwrap(),
            0.75,
            ClassLabel::dump_truck(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_detections(&mut buf, [&d]).unwrap();
        let got = read_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(got, vec![d]);
    }

    #[test]
    fn out_of_range_confidence_names_the_line() {
        let text = r#"{"frame":0,"cls":0,"conf":0.9,"x":0,"y":0,"w":5,"h":5}
{"frame":1,"cls":0,"conf":1.5,"x":0,"y":0,"w":5,"h":5}"#;
        let err = read_str(text).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn non_monotone_frames_are_rejected() {
        let text = r#"{"frame":5,"cls":0,"conf":0.9,"x":0,"y":0,"w":5,"h":5}
{"frame":4,"cls":0,"conf":0.9,"x":0,"y":0,"w":5,"h":5}"#;
        assert!(matches!(read_str(text), Err(Error::Parse { line: 2, .. })));
        // equal frames are fine (several detections per frame)
        let text = r#"{"frame":5,"cls":0,"conf":0.9,"x":0,"y":0,"w":5,"h":5}
{"frame":5,"cls":1,"conf":0.9,"x":50,"y":0,"w":5,"h":5}"#;
        assert_eq!(read_str(text).unwrap().len(), 2);
    }

    #[test]
    fn trailing_garbage_is_rejected_with_position() {
        let text = "{\"frame\":0,\"cls\":0,\"conf\":0.9,\"x\":0,\"y\":0,\"w\":5,\"h\":5}\nnot json\n";
        assert!(matches!(read_str(text), Err(Error::Parse { line: 2, .. })));
        let text = "{\"frame\":0,\"cls\":0,\"conf\":0.9,\"x\":0,\"y\":0,\"w\":5,\"h\":5} extra";
        assert!(matches!(read_str(text), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"frame":0,"cls":0,"conf":0.9,"x":0,"y":0,"w":5,"h":5,"mystery":1}"#;
        assert!(matches!(read_str(text), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let text = "# detections v9\n";
        assert!(matches!(
            read_str(text),
            Err(Error::VersionMismatch { format: "detections", found: 9, expected: 1 })
        ));
    }
}
