//! Tracks in, violation events and a summary report out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sda::{
    aggregate_events, average_track_seconds, estimate_volume, find_all_violation_pairs, group_validate, SdaConfig,
    SdaError, StateHistory, ViolationEvent, ViolationPair,
};
use crate::stats::{
    angle_between, distinct_violators, event_velocity_pair, face_to_face_fraction, histogram, kde_auto,
    per_slot_rates, violation_percentage, HistBin, KdeCurve, SlotRate, StatsError, DEFAULT_ANGLE_BANDWIDTH,
    DEFAULT_BANDWIDTH,
};
use crate::tracker::TrackOutput;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Sda(#[from] SdaError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub sda: SdaConfig,
    pub duration_bandwidth: f64,
    pub angle_bandwidth: f64,
    pub histogram_bin_seconds: f64,
    /// Average true track length in seconds, for the volume correction.
    pub at_gt_seconds: Option<f64>,
    pub invert_volume_ratio: bool,
    pub slot_label: String,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            sda: SdaConfig::default(),
            duration_bandwidth: DEFAULT_BANDWIDTH,
            angle_bandwidth: DEFAULT_ANGLE_BANDWIDTH,
            histogram_bin_seconds: 1.0,
            at_gt_seconds: None,
            invert_volume_ratio: false,
            slot_label: "all".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleStats {
    pub angles_deg: Vec<f64>,
    pub face_to_face_fraction: f64,
    pub kde: Option<KdeCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub fps: f64,
    pub frames: u64,
    pub duration_s: f64,
    pub trajectory_count: u64,
    pub average_track_seconds: Option<f64>,
    pub estimated_volume: f64,
    /// Why the volume is not a corrected estimate, when it is not.
    pub volume_flag: Option<String>,
    pub close_pair_frames: u64,
    pub group_pair_frames_removed: u64,
    pub event_count: u64,
    pub distinct_violators: u64,
    pub violation_percentage: Option<f64>,
    pub duration_histogram: Vec<HistBin>,
    pub duration_kde: Option<KdeCurve>,
    pub angles: AngleStats,
    pub slot: Option<SlotRate>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub history: StateHistory,
    pub kept: Vec<ViolationPair>,
    pub removed: Vec<ViolationPair>,
    pub events: Vec<ViolationEvent>,
    pub report: Report,
}

pub fn analyze(tracks: &[TrackOutput], cfg: &AnalysisConfig) -> Result<Analysis, AnalysisError> {
    cfg.sda.validate()?;
    let fps = cfg.sda.fps;
    let history = StateHistory::from_tracks(tracks, &cfg.sda)?;
    let pairs = find_all_violation_pairs(&history, cfg.sda.distance_threshold_px);
    let validated = group_validate(&history, &pairs, &cfg.sda)?;
    let events = aggregate_events(&validated.kept, &cfg.sda);

    let trajectory_count = history.trajectories().count() as u64;
    let at_infer = average_track_seconds(&history, fps);
    let (estimated_volume, volume_flag) = match (at_infer, cfg.at_gt_seconds) {
        (None, _) => (0.0, Some("no tracks".to_string())),
        (Some(_), None) => (
            trajectory_count as f64,
            Some("uncorrected: ground-truth average track length not configured".to_string()),
        ),
        (Some(inf), Some(gt)) => (estimate_volume(trajectory_count, gt, inf, cfg.invert_volume_ratio)?, None),
    };

    let violators = distinct_violators(&events).len() as u64;
    let violation_percentage = (estimated_volume > 0.0)
        .then(|| violation_percentage(violators, estimated_volume))
        .transpose()?;

    let durations: Vec<f64> = events.iter().map(|e| e.duration_s).collect();
    let duration_kde = (!durations.is_empty())
        .then(|| kde_auto(&durations, cfg.duration_bandwidth))
        .transpose()?;

    let velocity_pairs: Vec<_> = events.iter().filter_map(|e| event_velocity_pair(&history, e)).collect();
    let angles_deg: Vec<f64> = velocity_pairs.iter().filter_map(|&(a, b)| angle_between(a, b).ok()).collect();
    let angle_kde = (!angles_deg.is_empty())
        .then(|| kde_auto(&angles_deg, cfg.angle_bandwidth))
        .transpose()?;

    let frames = history.last_frame().map_or(0, |f| f + 1);
    let duration_s = frames as f64 / fps;
    let slot = if frames > 0 {
        per_slot_rates(&[(cfg.slot_label.clone(), events.len() as u64, duration_s)])?.pop()
    } else {
        None
    };

    let report = Report {
        fps,
        frames,
        duration_s,
        trajectory_count,
        average_track_seconds: at_infer,
        estimated_volume,
        volume_flag,
        close_pair_frames: pairs.len() as u64,
        group_pair_frames_removed: validated.removed.len() as u64,
        event_count: events.len() as u64,
        distinct_violators: violators,
        violation_percentage,
        duration_histogram: histogram(&durations, cfg.histogram_bin_seconds),
        duration_kde,
        angles: AngleStats {
            face_to_face_fraction: face_to_face_fraction(&velocity_pairs),
            angles_deg,
            kde: angle_kde,
        },
        slot,
    };
    Ok(Analysis {
        history,
        kept: validated.kept,
        removed: validated.removed,
        events,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;
    use crate::synth::{generate, Layout, ScenarioConfig, WalkerSpec};

    fn as_tracks(entries: &[crate::mot_eval::GtEntry]) -> Vec<TrackOutput> {
        entries
            .iter()
            .map(|e| TrackOutput {
                frame: e.frame,
                id: e.id,
                bbox: e.bbox,
                conf: 1.0,
                class_id: 1,
            })
            .collect()
    }

    #[test]
    fn empty_tracks_give_empty_report() {
        let a = analyze(&[], &AnalysisConfig::default()).unwrap();
        assert_eq!(a.report.event_count, 0);
        assert_eq!(a.report.estimated_volume, 0.0);
        assert!(a.report.volume_flag.is_some());
        assert!(a.report.duration_kde.is_none());
        assert!(a.report.slot.is_none());
    }

    #[test]
    fn group_scene_reports_nothing() {
        let cfg = ScenarioConfig {
            layout: Layout::Scripted(vec![WalkerSpec {
                offsets: vec![-10.0, 10.0],
                ..WalkerSpec::single(0, Point2::new(0.0, 240.0), 0.0, 1.8)
            }]),
            ..ScenarioConfig::default()
        };
        let s = generate(&cfg).unwrap();
        let a = analyze(&as_tracks(&s.truth.entries), &AnalysisConfig::default()).unwrap();
        assert!(a.report.close_pair_frames > 0);
        assert_eq!(a.report.event_count, 0);
        assert!(a.kept.is_empty());
    }

    #[test]
    fn head_on_strangers_report_one_face_to_face_event() {
        let cfg = ScenarioConfig {
            layout: Layout::Scripted(vec![
                WalkerSpec::single(0, Point2::new(100.0, 200.0), 0.0, 1.0),
                WalkerSpec::single(0, Point2::new(500.0, 210.0), std::f64::consts::PI, 1.0),
            ]),
            ..ScenarioConfig::default()
        };
        let s = generate(&cfg).unwrap();
        let a = analyze(
            &as_tracks(&s.truth.entries),
            &AnalysisConfig {
                at_gt_seconds: Some(1.0),
                ..AnalysisConfig::default()
            },
        )
        .unwrap();
        assert_eq!(a.events.len(), 1);
        let (e, iv) = (a.events[0], s.truth.intervals[0]);
        assert_eq!((e.pair, e.start_frame, e.end_frame), (iv.pair, iv.start_frame, iv.end_frame));
        assert_eq!(a.report.angles.face_to_face_fraction, 1.0);
        assert_eq!(a.report.distinct_violators, 2);
        assert!(a.report.volume_flag.is_none());
        let kde = a.report.duration_kde.unwrap();
        assert!((kde.integral() - 1.0).abs() < 1e-3);
    }
}
