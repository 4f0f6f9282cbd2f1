use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{trajectory_compare, velocity_compare, ObjectState, Result, SdaConfig, SdaError, StateHistory, TrajPoint};

/// Two objects closer than the distance threshold in one frame, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ViolationPair {
    pub frame: u64,
    pub i: u64,
    pub j: u64,
}

/// Pairs in `objects` whose ground points are strictly closer than
/// `threshold`, ordered by `(i, j)`.
pub fn find_violation_pairs(frame: u64, objects: &BTreeMap<u64, ObjectState>, threshold: f64) -> Vec<ViolationPair> {
    let objs: Vec<&ObjectState> = objects.values().collect();
    let mut out = Vec::new();
    for (a, oa) in objs.iter().enumerate() {
        for ob in &objs[a + 1..] {
            if oa.bp.distance(ob.bp) < threshold {
                out.push(ViolationPair { frame, i: oa.id, j: ob.id });
            }
        }
    }
    out
}

/// Close pairs of every frame in the history, in frame order.
pub fn find_all_violation_pairs(history: &StateHistory, threshold: f64) -> Vec<ViolationPair> {
    history
        .frames()
        .flat_map(|(f, objs)| find_violation_pairs(f, objs, threshold))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupValidation {
    /// Pairs still counted as violations.
    pub kept: Vec<ViolationPair>,
    /// Pairs judged to be one group walking together.
    pub removed: Vec<ViolationPair>,
}

fn history_slice<'a>(history: &'a StateHistory, id: u64, frame: u64, cfg: &SdaConfig) -> &'a [TrajPoint] {
    let Some(t) = history.trajectory(id) else { return &[] };
    match cfg.trajectory_window_frames {
        Some(w) => t.window(frame.saturating_sub(w - 1), frame),
        None => t.upto(frame),
    }
}

/// Splits close pairs into genuine violations and same-group pairs.
///
/// Trajectories are compared over the history up to each pair's frame (or
/// the configured trailing window). With `use_velocity_compare`, the pair's
/// current velocities must also match.
pub fn group_validate(history: &StateHistory, pairs: &[ViolationPair], cfg: &SdaConfig) -> Result<GroupValidation> {
    let mut out = GroupValidation::default();
    for &p in pairs {
        let si = history
            .state(p.frame, p.i)
            .ok_or(SdaError::UnknownId { frame: p.frame, id: p.i })?;
        let sj = history
            .state(p.frame, p.j)
            .ok_or(SdaError::UnknownId { frame: p.frame, id: p.j })?;
        let same_trajectory = || {
            trajectory_compare(
                history_slice(history, p.i, p.frame, cfg),
                history_slice(history, p.j, p.frame, cfg),
                cfg,
            )
        };
        let same_group = if cfg.use_velocity_compare {
            velocity_compare(si.v, sj.v, cfg) && same_trajectory()
        } else {
            same_trajectory()
        };
        if same_group {
            out.removed.push(p);
        } else {
            out.kept.push(p);
        }
    }
    Ok(out)
}
