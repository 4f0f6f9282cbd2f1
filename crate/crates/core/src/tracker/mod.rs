//! Tracking by detection: Kalman prediction, IoU association solved with the
//! Hungarian method, and track birth/death bookkeeping.

mod assignment;
mod kalman;

pub use assignment::{assignment_cost, hungarian, FORBIDDEN};
pub use kalman::{bbox_to_measurement, state_to_bbox, KalmanTrack, Measurement, MotionModel, StateCov, StateVec};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::BBox;

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("frame {frame} is not after previously processed frame {last}")]
    OutOfOrder { frame: u64, last: u64 },
    #[error("invalid detection in frame {frame}: {reason}")]
    InvalidDetection { frame: u64, reason: String },
    #[error("cost matrix contains a non-finite entry")]
    NonFiniteCost,
    #[error("invalid tracker configuration: {0}")]
    InvalidConfig(String),
}

/// One detector output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame: u64,
    pub bbox: BBox,
    pub conf: f64,
    pub class_id: i64,
}

impl Detection {
    pub fn validate(&self) -> Result<(), TrackError> {
        let reason = if !self.bbox.is_valid() {
            "bounding box must have positive finite extent"
        } else if !(0.0..=1.0).contains(&self.conf) {
            "confidence outside [0, 1]"
        } else {
            return Ok(());
        };
        Err(TrackError::InvalidDetection {
            frame: self.frame,
            reason: reason.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    pub iou_threshold: f64,
    /// Frames a track may go unmatched before it is dropped.
    pub max_age: u32,
    /// Detections needed before a track is reported.
    pub min_hits: u32,
    pub process_noise_scale: f64,
    pub measurement_noise_scale: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.3,
            max_age: 1,
            min_hits: 3,
            process_noise_scale: 1.0,
            measurement_noise_scale: 1.0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), TrackError> {
        if !(0.0..=1.0).contains(&self.iou_threshold) {
            return Err(TrackError::InvalidConfig("iou_threshold must lie in [0, 1]".into()));
        }
        if !(self.process_noise_scale > 0.0 && self.process_noise_scale.is_finite()) {
            return Err(TrackError::InvalidConfig("process_noise_scale must be positive".into()));
        }
        if !(self.measurement_noise_scale >= 0.0 && self.measurement_noise_scale.is_finite()) {
            return Err(TrackError::InvalidConfig(
                "measurement_noise_scale must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Intersection over union of two boxes; 0 when disjoint.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = a.right().min(b.right()) - a.x.max(b.x);
    let ih = a.bottom().min(b.bottom()) - a.y.max(b.y);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Association {
    /// `(track index, detection index)`, sorted by track index.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_tracks: Vec<usize>,
    pub unmatched_detections: Vec<usize>,
}

/// Optimal one-to-one pairing on cost `1 − IoU`; pairs below `iou_threshold`
/// are returned as unmatched.
pub fn associate(tracks: &[BBox], detections: &[BBox], iou_threshold: f64) -> Association {
    let mut out = Association::default();
    if tracks.is_empty() || detections.is_empty() {
        out.unmatched_tracks = (0..tracks.len()).collect();
        out.unmatched_detections = (0..detections.len()).collect();
        return out;
    }
    let ious = DMatrix::from_fn(tracks.len(), detections.len(), |t, d| iou(&tracks[t], &detections[d]));
    let cost = ious.map(|v| 1.0 - v);
    let pairs = hungarian(&cost).expect("IoU costs are finite");
    let mut track_used = vec![false; tracks.len()];
    let mut det_used = vec![false; detections.len()];
    for (t, d) in pairs {
        if ious[(t, d)] >= iou_threshold {
            out.matches.push((t, d));
            track_used[t] = true;
            det_used[d] = true;
        }
    }
    out.unmatched_tracks = (0..tracks.len()).filter(|&t| !track_used[t]).collect();
    out.unmatched_detections = (0..detections.len()).filter(|&d| !det_used[d]).collect();
    out
}

/// A reported track position for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackOutput {
    pub frame: u64,
    pub id: u64,
    pub bbox: BBox,
    pub conf: f64,
    pub class_id: i64,
}

/// SORT-style multi-object tracker. One instance per video; frames must be
/// presented in strictly increasing order.
#[derive(Debug, Clone)]
pub struct Sort {
    cfg: TrackerConfig,
    model: MotionModel,
    tracks: Vec<KalmanTrack>,
    next_id: u64,
    frames_seen: u64,
    last_frame: Option<u64>,
}

impl Sort {
    pub fn new(cfg: TrackerConfig) -> Result<Self, TrackError> {
        cfg.validate()?;
        Ok(Self {
            model: MotionModel::new(&cfg),
            cfg,
            tracks: Vec::new(),
            next_id: 1,
            frames_seen: 0,
            last_frame: None,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn tracks(&self) -> &[KalmanTrack] {
        &self.tracks
    }

    /// Processes the detections of `frame` and returns the tracks confirmed
    /// in it. Skipped frame numbers are advanced as frames without
    /// detections.
    pub fn step(&mut self, frame: u64, detections: &[Detection]) -> Result<Vec<TrackOutput>, TrackError> {
        if let Some(last) = self.last_frame {
            if frame <= last {
                return Err(TrackError::OutOfOrder { frame, last });
            }
        }
        for d in detections {
            d.validate()?;
            if d.frame != frame {
                return Err(TrackError::InvalidDetection {
                    frame,
                    reason: format!("detection belongs to frame {}", d.frame),
                });
            }
        }
        if let Some(last) = self.last_frame {
            for skipped in last + 1..frame {
                self.advance(skipped, &[]);
            }
        }
        self.last_frame = Some(frame);
        Ok(self.advance(frame, detections))
    }

    fn advance(&mut self, frame: u64, detections: &[Detection]) -> Vec<TrackOutput> {
        self.frames_seen += 1;
        for t in &mut self.tracks {
            t.predict(&self.model);
        }
        self.tracks.retain(|t| t.state.iter().all(|v| v.is_finite()));

        let predicted: Vec<BBox> = self.tracks.iter().map(KalmanTrack::bbox).collect();
        let boxes: Vec<BBox> = detections.iter().map(|d| d.bbox).collect();
        let assoc = associate(&predicted, &boxes, self.cfg.iou_threshold);
        for &(t, d) in &assoc.matches {
            self.tracks[t].update(&detections[d], &self.model);
        }
        for &d in &assoc.unmatched_detections {
            self.tracks.push(KalmanTrack::new(self.next_id, &detections[d], &self.model));
            self.next_id += 1;
        }

        let warm_up = self.frames_seen <= u64::from(self.cfg.min_hits);
        let out = self
            .tracks
            .iter()
            .filter(|t| t.time_since_update == 0 && (t.hits >= self.cfg.min_hits || warm_up))
            .map(|t| TrackOutput {
                frame,
                id: t.id,
                bbox: t.bbox(),
                conf: t.conf,
                class_id: t.class_id,
            })
            .collect();
        let max_age = self.cfg.max_age;
        self.tracks.retain(|t| t.time_since_update <= max_age);
        out
    }
}

/// Runs a tracker over a whole detection stream, grouping by frame. Frames
/// without detections inside `0..=last_frame` are still stepped.
pub fn track_all(cfg: TrackerConfig, detections: &[Detection]) -> Result<Vec<TrackOutput>, TrackError> {
    let mut sort = Sort::new(cfg)?;
    let mut by_frame: std::collections::BTreeMap<u64, Vec<Detection>> = Default::default();
    for d in detections {
        by_frame.entry(d.frame).or_default().push(*d);
    }
    let mut out = Vec::new();
    let Some(&last) = by_frame.keys().next_back() else {
        return Ok(out);
    };
    let first = *by_frame.keys().next().expect("non-empty");
    for f in first..=last {
        let dets = by_frame.get(&f).map(Vec::as_slice).unwrap_or(&[]);
        out.extend(sort.step(f, dets)?);
    }
    Ok(out)
}
