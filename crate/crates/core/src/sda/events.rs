use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Result, SdaConfig, SdaError, StateHistory, ViolationPair};

/// A run of consecutive violating frames for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationEvent {
    pub pair: [u64; 2],
    pub start_frame: u64,
    pub end_frame: u64,
    pub duration_s: f64,
}

/// Merges per-frame violations into events and drops those shorter than
/// `min_event_seconds`. Gaps of up to `merge_gap_frames` missing frames are
/// bridged. Output is ordered by start frame, then pair.
pub fn aggregate_events(pairs: &[ViolationPair], cfg: &SdaConfig) -> Vec<ViolationEvent> {
    let mut frames: BTreeMap<(u64, u64), Vec<u64>> = BTreeMap::new();
    for p in pairs {
        frames.entry((p.i, p.j)).or_default().push(p.frame);
    }
    let mut out = Vec::new();
    let mut emit = |pair: (u64, u64), start: u64, end: u64| {
        let duration_s = (end - start + 1) as f64 / cfg.fps;
        if duration_s >= cfg.min_event_seconds {
            out.push(ViolationEvent {
                pair: [pair.0, pair.1],
                start_frame: start,
                end_frame: end,
                duration_s,
            });
        }
    };
    for (pair, mut fs) in frames {
        fs.sort_unstable();
        fs.dedup();
        let (mut start, mut end) = (fs[0], fs[0]);
        for &f in &fs[1..] {
            if f - end - 1 > cfg.merge_gap_frames {
                emit(pair, start, end);
                start = f;
            }
            end = f;
        }
        emit(pair, start, end);
    }
    out.sort_by(|a, b| (a.start_frame, a.pair).cmp(&(b.start_frame, b.pair)));
    out
}

/// Corrects a raw trajectory count for fragmentation using the ratio of the
/// true to the inferred average track length.
///
/// With `invert_ratio` the count is scaled by `at_infer / at_gt` instead,
/// which is the form that recovers the true count when tracks split.
pub fn estimate_volume(trajectory_count: u64, at_gt: f64, at_infer: f64, invert_ratio: bool) -> Result<f64> {
    if trajectory_count == 0 {
        return Err(SdaError::NonPositive("trajectory count"));
    }
    if !(at_gt > 0.0 && at_gt.is_finite()) {
        return Err(SdaError::NonPositive("ground-truth average track length"));
    }
    if !(at_infer > 0.0 && at_infer.is_finite()) {
        return Err(SdaError::NonPositive("inferred average track length"));
    }
    let tc = trajectory_count as f64;
    Ok(if invert_ratio { tc * at_infer / at_gt } else { tc * at_gt / at_infer })
}

/// Mean track lifetime in seconds, first to last appearance inclusive.
pub fn average_track_seconds(history: &StateHistory, fps: f64) -> Option<f64> {
    let spans: Vec<f64> = history
        .trajectories()
        .filter_map(|(_, t)| Some((t.last_frame()? - t.first_frame()? + 1) as f64 / fps))
        .collect();
    (!spans.is_empty()).then(|| spans.iter().sum::<f64>() / spans.len() as f64)
}
