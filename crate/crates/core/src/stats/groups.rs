//! Scoring group validation against annotated groups.
//!
//! The unit of evaluation is a pair-frame. Ground-truth positives are pairs
//! of the same group standing closer than the distance threshold; a
//! prediction is a close pair that validation removed as one group.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Result, StatsError};
use crate::geom::BBox;
use crate::mot_eval::GtEntry;
use crate::sda::ViolationPair;
use crate::tracker::{hungarian, iou, FORBIDDEN};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupGt {
    /// Track id to group id; an id belongs to at most one group.
    pub membership: BTreeMap<u64, u64>,
    /// Frame to id to box.
    pub boxes: BTreeMap<u64, BTreeMap<u64, BBox>>,
}

impl GroupGt {
    /// `groups` lists member ids per group. An id listed under two groups
    /// stays in the first.
    pub fn new(entries: &[GtEntry], groups: &BTreeMap<u64, Vec<u64>>) -> Self {
        let mut membership = BTreeMap::new();
        for (&g, members) in groups {
            for &m in members {
                membership.entry(m).or_insert(g);
            }
        }
        let mut boxes: BTreeMap<u64, BTreeMap<u64, BBox>> = BTreeMap::new();
        for e in entries {
            boxes.entry(e.frame).or_default().insert(e.id, e.bbox);
        }
        Self { membership, boxes }
    }

    pub fn same_group(&self, a: u64, b: u64) -> bool {
        matches!((self.membership.get(&a), self.membership.get(&b)), (Some(x), Some(y)) if x == y)
    }

    /// Box enclosing each group's members present in `frame`.
    pub fn group_boxes(&self, frame: u64) -> BTreeMap<u64, BBox> {
        let mut corners: BTreeMap<u64, Vec<crate::geom::Point2>> = BTreeMap::new();
        if let Some(objs) = self.boxes.get(&frame) {
            for (id, b) in objs {
                if let Some(&g) = self.membership.get(id) {
                    let c = corners.entry(g).or_default();
                    c.push(crate::geom::Point2::new(b.x, b.y));
                    c.push(crate::geom::Point2::new(b.right(), b.bottom()));
                }
            }
        }
        corners
            .into_iter()
            .filter_map(|(g, pts)| Some((g, BBox::enclosing(pts)?)))
            .collect()
    }

    /// Same-group pair-frames whose ground points are closer than `threshold`.
    pub fn positive_pairs(&self, threshold: f64) -> BTreeSet<ViolationPair> {
        let mut out = BTreeSet::new();
        for (&frame, objs) in &self.boxes {
            let members: Vec<(u64, BBox)> = objs
                .iter()
                .filter(|(id, _)| self.membership.contains_key(id))
                .map(|(id, b)| (*id, *b))
                .collect();
            for (a, &(i, bi)) in members.iter().enumerate() {
                for &(j, bj) in &members[a + 1..] {
                    if self.same_group(i, j) && bi.bottom_center().distance(bj.bottom_center()) < threshold {
                        out.insert(ViolationPair { frame, i, j });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Set when nothing was predicted, so precision is reported as 0.
    pub precision_undefined: bool,
}

impl GroupMetrics {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Result<Self> {
        if tp + fn_ == 0 {
            return Err(StatsError::NoPositivePairs);
        }
        let precision_undefined = tp + fp == 0;
        let precision = if precision_undefined { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = tp as f64 / (tp + fn_) as f64;
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Ok(Self {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
            precision_undefined,
        })
    }
}

/// Scores predicted same-group pair-frames (ids in ground-truth space).
/// Predictions are normalised to `i < j` and deduplicated.
pub fn group_validation_metrics(predicted: &[ViolationPair], gt: &GroupGt, threshold: f64) -> Result<GroupMetrics> {
    let positives = gt.positive_pairs(threshold);
    let pred: BTreeSet<ViolationPair> = predicted
        .iter()
        .map(|p| ViolationPair {
            frame: p.frame,
            i: p.i.min(p.j),
            j: p.i.max(p.j),
        })
        .collect();
    let tp = pred.intersection(&positives).count() as u64;
    GroupMetrics::from_counts(tp, pred.len() as u64 - tp, positives.len() as u64 - tp)
}

/// Per-frame identity correspondence `(frame, hyp id) → gt id`, matched by
/// minimum `1 − IoU` among pairs overlapping at least `iou_threshold`.
pub fn map_hyp_to_gt(gt: &[GtEntry], hyp: &[GtEntry], iou_threshold: f64) -> BTreeMap<(u64, u64), u64> {
    let group = |v: &[GtEntry]| {
        let mut m: BTreeMap<u64, Vec<GtEntry>> = BTreeMap::new();
        for e in v {
            m.entry(e.frame).or_default().push(*e);
        }
        for es in m.values_mut() {
            es.sort_by_key(|e| e.id);
        }
        m
    };
    let (g, h) = (group(gt), group(hyp));
    let mut out = BTreeMap::new();
    for (frame, hs) in &h {
        let Some(gs) = g.get(frame) else { continue };
        let ious = DMatrix::from_fn(hs.len(), gs.len(), |r, c| iou(&hs[r].bbox, &gs[c].bbox));
        let cost = ious.map(|o| if o >= iou_threshold { 1.0 - o } else { FORBIDDEN });
        for (r, c) in hungarian(&cost).expect("finite costs") {
            if ious[(r, c)] >= iou_threshold {
                out.insert((*frame, hs[r].id), gs[c].id);
            }
        }
    }
    out
}
