//! MOT-challenge text format: `frame,id,x,y,w,h,conf,class,visibility`.
//!
//! Frames are 1-based on disk and 0-based in memory. Detections carry id −1.
//! Reals are written in shortest round-trip form so a write/read cycle is
//! lossless.

use std::io::{Read, Write};

use thiserror::Error;

use crate::geom::BBox;
use crate::mot_eval::GtEntry;
use crate::tracker::{Detection, TrackOutput};

#[derive(Debug, Error)]
pub enum MotCsvError {
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One row of a MOT file, frame already converted to 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotRecord {
    pub frame: u64,
    pub id: i64,
    pub bbox: BBox,
    pub conf: f64,
    pub class_id: i64,
    pub visibility: f64,
}

impl MotRecord {
    pub fn to_detection(&self) -> Detection {
        Detection {
            frame: self.frame,
            bbox: self.bbox,
            conf: self.conf,
            class_id: self.class_id,
        }
    }

    pub fn from_detection(d: &Detection) -> Self {
        Self {
            frame: d.frame,
            id: -1,
            bbox: d.bbox,
            conf: d.conf,
            class_id: d.class_id,
            visibility: -1.0,
        }
    }

    pub fn from_track(t: &TrackOutput) -> Self {
        Self {
            frame: t.frame,
            id: t.id as i64,
            bbox: t.bbox,
            conf: t.conf,
            class_id: t.class_id,
            visibility: -1.0,
        }
    }

    pub fn from_gt(g: &GtEntry) -> Self {
        Self {
            frame: g.frame,
            id: g.id as i64,
            bbox: g.bbox,
            conf: 1.0,
            class_id: 1,
            visibility: 1.0,
        }
    }

    /// Identity-bearing view; `None` for rows without a non-negative id.
    pub fn to_gt(&self) -> Option<GtEntry> {
        (self.id >= 0).then_some(GtEntry {
            frame: self.frame,
            id: self.id as u64,
            bbox: self.bbox,
        })
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str, line: u64) -> Result<T, MotCsvError> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| MotCsvError::Malformed {
            line,
            reason: format!("cannot parse {name} from {:?}", rec.get(i).unwrap_or("")),
        })
}

pub fn read_mot(reader: impl Read) -> Result<Vec<MotRecord>, MotCsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| MotCsvError::Malformed {
            line: e.position().map_or(i as u64 + 1, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        if rec.len() != 9 {
            return Err(MotCsvError::Malformed {
                line,
                reason: format!("expected 9 fields, found {}", rec.len()),
            });
        }
        let frame: u64 = field(&rec, 0, "frame", line)?;
        if frame == 0 {
            return Err(MotCsvError::Malformed {
                line,
                reason: "frame numbers are 1-based".into(),
            });
        }
        let bbox = BBox::new(
            field(&rec, 2, "x", line)?,
            field(&rec, 3, "y", line)?,
            field(&rec, 4, "w", line)?,
            field(&rec, 5, "h", line)?,
        );
        if !bbox.is_valid() {
            return Err(MotCsvError::Malformed {
                line,
                reason: "box width and height must be positive".into(),
            });
        }
        out.push(MotRecord {
            frame: frame - 1,
            id: field(&rec, 1, "id", line)?,
            bbox,
            conf: field(&rec, 6, "conf", line)?,
            class_id: field(&rec, 7, "class", line)?,
            visibility: field(&rec, 8, "visibility", line)?,
        });
    }
    Ok(out)
}

pub fn write_mot(mut writer: impl Write, records: &[MotRecord]) -> Result<(), MotCsvError> {
    for r in records {
        writeln!(
            writer,
            "{},{},{},{},{},{},{},{},{}",
            r.frame + 1,
            r.id,
            r.bbox.x,
            r.bbox.y,
            r.bbox.w,
            r.bbox.h,
            r.conf,
            r.class_id,
            r.visibility
        )?;
    }
    writer.flush()?;
    Ok(())
}
