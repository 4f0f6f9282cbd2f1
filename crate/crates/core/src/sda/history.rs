use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{bottom_point, Result, SdaConfig, SdaError};
use crate::geom::{BBox, Point2, Vec2};
use crate::tracker::TrackOutput;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajPoint {
    pub frame: u64,
    pub bp: Point2,
}

/// Ground-contact points of one object, frames strictly increasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    points: Vec<TrajPoint>,
}

impl Trajectory {
    pub fn from_points(points: Vec<TrajPoint>) -> Result<Self> {
        if let Some(w) = points.windows(2).find(|w| w[1].frame <= w[0].frame) {
            return Err(SdaError::OutOfOrder {
                frame: w[1].frame,
                last: w[0].frame,
            });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TrajPoint] {
        &self.points
    }

    pub fn first_frame(&self) -> Option<u64> {
        self.points.first().map(|p| p.frame)
    }

    pub fn last_frame(&self) -> Option<u64> {
        self.points.last().map(|p| p.frame)
    }

    /// Points with `frame ≤ t`.
    pub fn upto(&self, t: u64) -> &[TrajPoint] {
        let end = self.points.partition_point(|p| p.frame <= t);
        &self.points[..end]
    }

    /// Points with `from ≤ frame ≤ to`.
    pub fn window(&self, from: u64, to: u64) -> &[TrajPoint] {
        let start = self.points.partition_point(|p| p.frame < from);
        let end = self.points.partition_point(|p| p.frame <= to);
        &self.points[start..end.max(start)]
    }
}

/// Per-frame velocities of a trajectory.
///
/// The first sample is at rest; later samples take the displacement since
/// the previous sample divided by the frame gap. With smoothing on, from the
/// third sample onward each velocity is `alpha·raw + (1 − alpha)·previous`.
pub fn velocity_update(traj: &[TrajPoint], alpha: f64, use_ewa: bool) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(traj.len());
    for (k, p) in traj.iter().enumerate() {
        let v = if k == 0 {
            Vec2::ZERO
        } else {
            let prev = traj[k - 1];
            let raw = (p.bp - prev.bp) / (p.frame - prev.frame) as f64;
            if use_ewa && k >= 2 {
                raw * alpha + out[k - 1] * (1.0 - alpha)
            } else {
                raw
            }
        };
        out.push(v);
    }
    out
}

/// One object in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub roi: BBox,
    pub bp: Point2,
    pub id: u64,
    pub v: Vec2,
}

/// Every processed frame's objects, and each object's trajectory.
///
/// Ingestion is single-writer and strictly frame ordered; velocities are
/// computed causally as frames arrive.
#[derive(Debug, Clone)]
pub struct StateHistory {
    frames: BTreeMap<u64, BTreeMap<u64, ObjectState>>,
    trajectories: BTreeMap<u64, Trajectory>,
    alpha: f64,
    use_ewa: bool,
    last_frame: Option<u64>,
}

impl StateHistory {
    pub fn new(ewa_alpha: f64, use_ewa: bool) -> Self {
        Self {
            frames: BTreeMap::new(),
            trajectories: BTreeMap::new(),
            alpha: ewa_alpha,
            use_ewa,
            last_frame: None,
        }
    }

    pub fn with_config(cfg: &SdaConfig) -> Self {
        Self::new(cfg.ewa_alpha, cfg.use_ewa)
    }

    /// Builds a history from a tracker output stream in any order.
    pub fn from_tracks(tracks: &[TrackOutput], cfg: &SdaConfig) -> Result<Self> {
        let mut by_frame: BTreeMap<u64, Vec<(u64, BBox)>> = BTreeMap::new();
        for t in tracks {
            by_frame.entry(t.frame).or_default().push((t.id, t.bbox));
        }
        let mut h = Self::with_config(cfg);
        for (f, objs) in by_frame {
            h.ingest_frame(f, &objs)?;
        }
        Ok(h)
    }

    pub fn ingest_frame(&mut self, frame: u64, objects: &[(u64, BBox)]) -> Result<()> {
        if let Some(last) = self.last_frame {
            if frame <= last {
                return Err(SdaError::OutOfOrder { frame, last });
            }
        }
        let mut states = BTreeMap::new();
        for &(id, roi) in objects {
            let bp = bottom_point(&roi)?;
            if states.contains_key(&id) {
                return Err(SdaError::DuplicateId { frame, id });
            }
            states.insert(id, ObjectState { roi, bp, id, v: Vec2::ZERO });
        }
        for (id, state) in states.iter_mut() {
            let traj = self.trajectories.entry(*id).or_default();
            let k = traj.points.len();
            if let Some(prev) = traj.points.last() {
                let raw = (state.bp - prev.bp) / (frame - prev.frame) as f64;
                state.v = if self.use_ewa && k >= 2 {
                    let prev_v = self.frames[&prev.frame][id].v;
                    raw * self.alpha + prev_v * (1.0 - self.alpha)
                } else {
                    raw
                };
            }
            traj.points.push(TrajPoint { frame, bp: state.bp });
        }
        self.frames.insert(frame, states);
        self.last_frame = Some(frame);
        Ok(())
    }

    pub fn frame(&self, frame: u64) -> Option<&BTreeMap<u64, ObjectState>> {
        self.frames.get(&frame)
    }

    pub fn frames(&self) -> impl Iterator<Item = (u64, &BTreeMap<u64, ObjectState>)> {
        self.frames.iter().map(|(f, s)| (*f, s))
    }

    pub fn state(&self, frame: u64, id: u64) -> Option<&ObjectState> {
        self.frames.get(&frame)?.get(&id)
    }

    pub fn trajectory(&self, id: u64) -> Option<&Trajectory> {
        self.trajectories.get(&id)
    }

    pub fn trajectories(&self) -> impl Iterator<Item = (u64, &Trajectory)> {
        self.trajectories.iter().map(|(id, t)| (*id, t))
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn first_frame(&self) -> Option<u64> {
        self.frames.keys().next().copied()
    }

    pub fn last_frame(&self) -> Option<u64> {
        self.last_frame
    }
}
