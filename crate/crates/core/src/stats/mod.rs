//! Summary statistics over violation events.

mod groups;

pub use groups::{group_validation_metrics, map_hyp_to_gt, GroupGt, GroupMetrics};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;
use crate::sda::{StateHistory, ViolationEvent};

pub const KDE_GRID_POINTS: usize = 512;
pub const DEFAULT_BANDWIDTH: f64 = 0.08;
/// Angle curves use the same bandwidth expressed as a fraction of 180°.
pub const DEFAULT_ANGLE_BANDWIDTH: f64 = DEFAULT_BANDWIDTH * 180.0;
pub const FACE_TO_FACE_DEG: f64 = 150.0;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no samples")]
    EmptySamples,
    #[error("bandwidth {0} must be positive")]
    InvalidBandwidth(f64),
    #[error("zero-length velocity vector")]
    ZeroVector,
    #[error("slot {0:?} has non-positive duration")]
    ZeroDurationSlot(String),
    #[error("volume {0} must be positive")]
    NonPositiveVolume(f64),
    #[error("ground truth has no same-group pairs within the threshold")]
    NoPositivePairs,
}

pub type Result<T> = std::result::Result<T, StatsError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeCurve {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, d)| 0.5 * (x[1] - x[0]) * (d[0] + d[1]))
            .sum()
    }
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian kernel density estimate evaluated at `grid`.
pub fn kde(samples: &[f64], bandwidth: f64, grid: &[f64]) -> Result<KdeCurve> {
    if samples.is_empty() {
        return Err(StatsError::EmptySamples);
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(StatsError::InvalidBandwidth(bandwidth));
    }
    let norm = INV_SQRT_2PI / (samples.len() as f64 * bandwidth);
    let density = grid
        .iter()
        .map(|&x| {
            norm * samples
                .iter()
                .map(|&s| {
                    let z = (x - s) / bandwidth;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect();
    Ok(KdeCurve {
        grid: grid.to_vec(),
        density,
        bandwidth,
    })
}

/// [`KDE_GRID_POINTS`] evenly spaced points over `[min − 5h, max + 5h]`.
pub fn kde_grid(samples: &[f64], bandwidth: f64) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(StatsError::EmptySamples);
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 5.0 * bandwidth;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 5.0 * bandwidth;
    let step = (hi - lo) / (KDE_GRID_POINTS - 1) as f64;
    Ok((0..KDE_GRID_POINTS).map(|i| lo + step * i as f64).collect())
}

pub fn kde_auto(samples: &[f64], bandwidth: f64) -> Result<KdeCurve> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(StatsError::InvalidBandwidth(bandwidth));
    }
    kde(samples, bandwidth, &kde_grid(samples, bandwidth)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistBin {
    pub bin_start: f64,
    pub bin_end: f64,
    pub count: u64,
}

/// Right-open bins of `width` starting at 0 and covering every value.
/// Negative values are clamped into the first bin.
pub fn histogram(values: &[f64], width: f64) -> Vec<HistBin> {
    let Some(max) = values.iter().copied().reduce(f64::max) else {
        return Vec::new();
    };
    let n = (max / width).floor().max(0.0) as usize + 1;
    let mut counts = vec![0u64; n];
    for &v in values {
        let k = ((v / width).floor().max(0.0) as usize).min(n - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistBin {
            bin_start: k as f64 * width,
            bin_end: (k + 1) as f64 * width,
            count,
        })
        .collect()
}

/// Angle between two directions in degrees, `[0, 180]`.
pub fn angle_between(v1: Vec2, v2: Vec2) -> Result<f64> {
    let (n1, n2) = (v1.norm(), v2.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return Err(StatsError::ZeroVector);
    }
    Ok((v1.dot(v2) / (n1 * n2)).clamp(-1.0, 1.0).acos().to_degrees())
}

/// Mean velocity of each member of the event's pair over the event frames.
pub fn event_velocity_pair(history: &StateHistory, event: &ViolationEvent) -> Option<(Vec2, Vec2)> {
    let mut sums = (Vec2::ZERO, Vec2::ZERO);
    let mut n = 0usize;
    for f in event.start_frame..=event.end_frame {
        let (Some(a), Some(b)) = (history.state(f, event.pair[0]), history.state(f, event.pair[1])) else {
            continue;
        };
        sums = (sums.0 + a.v, sums.1 + b.v);
        n += 1;
    }
    (n > 0).then(|| (sums.0 / n as f64, sums.1 / n as f64))
}

/// Share of velocity pairs heading at each other (angle above 150°).
/// Pairs with a stationary member have no direction and are left out; with
/// nothing left the fraction is 0.
pub fn face_to_face_fraction(pairs: &[(Vec2, Vec2)]) -> f64 {
    let angles: Vec<f64> = pairs.iter().filter_map(|&(a, b)| angle_between(a, b).ok()).collect();
    if angles.is_empty() {
        return 0.0;
    }
    angles.iter().filter(|&&a| a > FACE_TO_FACE_DEG).count() as f64 / angles.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRate {
    pub label: String,
    pub events: u64,
    pub minutes: f64,
    pub per_minute: f64,
}

/// Events per minute for each `(label, events, duration_s)` slot.
pub fn per_slot_rates(slots: &[(String, u64, f64)]) -> Result<Vec<SlotRate>> {
    slots
        .iter()
        .map(|(label, events, secs)| {
            if !(*secs > 0.0) {
                return Err(StatsError::ZeroDurationSlot(label.clone()));
            }
            let minutes = secs / 60.0;
            Ok(SlotRate {
                label: label.clone(),
                events: *events,
                minutes,
                per_minute: *events as f64 / minutes,
            })
        })
        .collect()
}

pub fn violation_percentage(violators: u64, volume: f64) -> Result<f64> {
    if !(volume > 0.0) {
        return Err(StatsError::NonPositiveVolume(volume));
    }
    Ok(100.0 * violators as f64 / volume)
}

/// Track ids taking part in at least one event.
pub fn distinct_violators(events: &[ViolationEvent]) -> BTreeSet<u64> {
    events.iter().flat_map(|e| e.pair).collect()
}
