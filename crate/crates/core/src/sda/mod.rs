//! Social-distancing analysis over tracker output.
//!
//! Tracks are folded into a [`StateHistory`] holding, per frame, each
//! object's box, ground-contact point and velocity, plus every object's
//! trajectory so far. Each frame's close pairs are screened by
//! [`group_validate`] so that pedestrians walking together are not counted
//! against each other, and the surviving pairs are merged into timed
//! [`ViolationEvent`]s.

mod events;
mod history;
mod measures;
mod violations;

pub use events::{aggregate_events, average_track_seconds, estimate_volume, ViolationEvent};
pub use history::{velocity_update, ObjectState, StateHistory, TrajPoint, Trajectory};
pub use measures::{
    cosine_distance, magnitude_distance, shared_distances, trajectory_compare, trajectory_similarity,
    trajectory_stability, velocity_compare, velocity_distance,
};
pub use violations::{find_all_violation_pairs, find_violation_pairs, group_validate, GroupValidation, ViolationPair};

use thiserror::Error;

use crate::geom::{BBox, Point2};

#[derive(Debug, Error, PartialEq)]
pub enum SdaError {
    #[error("bounding box {0:?} must have positive width and height")]
    InvalidBox(BBox),
    #[error("zero-length velocity vector")]
    ZeroVector,
    #[error("trajectories share no frame")]
    NoCommonFrames,
    #[error("trajectories share {0} frame(s); at least 2 are needed")]
    TooFewCommonFrames(usize),
    #[error("frame {frame} is not after previously ingested frame {last}")]
    OutOfOrder { frame: u64, last: u64 },
    #[error("id {id} appears twice in frame {frame}")]
    DuplicateId { frame: u64, id: u64 },
    #[error("id {id} has no state in frame {frame}")]
    UnknownId { frame: u64, id: u64 },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("invalid analysis configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, SdaError>;

#[derive(Debug, Clone, PartialEq)]
pub struct SdaConfig {
    /// Pixel distance standing in for six feet on the calibrated ground plane.
    pub distance_threshold_px: f64,
    /// Weight of the direction term in the velocity distance.
    pub gamma: f64,
    /// Accepted for configuration compatibility; no measure uses it.
    pub lambda: f64,
    pub velocity_threshold: f64,
    pub stability_threshold: f64,
    pub ewa_alpha: f64,
    pub use_ewa: bool,
    /// Requires matching velocities in addition to matching trajectories
    /// before a pair is declared one group.
    pub use_velocity_compare: bool,
    pub min_event_seconds: f64,
    pub fps: f64,
    /// Missing frames tolerated inside one event.
    pub merge_gap_frames: u64,
    /// Restrict trajectory comparison to the most recent frames.
    pub trajectory_window_frames: Option<u64>,
}

impl Default for SdaConfig {
    fn default() -> Self {
        Self {
            distance_threshold_px: 35.0,
            gamma: 0.1,
            lambda: 1.0,
            velocity_threshold: 0.21,
            stability_threshold: 0.25,
            ewa_alpha: 0.5,
            use_ewa: true,
            use_velocity_compare: false,
            min_event_seconds: 1.0,
            fps: 15.0,
            merge_gap_frames: 0,
            trajectory_window_frames: None,
        }
    }
}

impl SdaConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("distance_threshold_px", self.distance_threshold_px),
            ("velocity_threshold", self.velocity_threshold),
            ("stability_threshold", self.stability_threshold),
            ("fps", self.fps),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SdaError::NonPositive(name));
            }
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(SdaError::InvalidConfig("gamma must lie in [0, 1]".into()));
        }
        if !(self.ewa_alpha > 0.0 && self.ewa_alpha <= 1.0) {
            return Err(SdaError::InvalidConfig("ewa_alpha must lie in (0, 1]".into()));
        }
        if !(self.min_event_seconds >= 0.0 && self.min_event_seconds.is_finite()) {
            return Err(SdaError::InvalidConfig("min_event_seconds must be non-negative".into()));
        }
        if self.trajectory_window_frames == Some(0) {
            return Err(SdaError::InvalidConfig("trajectory_window_frames must be positive".into()));
        }
        Ok(())
    }
}

/// Middle of the bottom edge of `roi`.
pub fn bottom_point(roi: &BBox) -> Result<Point2> {
    if !roi.is_valid() {
        return Err(SdaError::InvalidBox(*roi));
    }
    Ok(roi.bottom_center())
}
