//! CLEAR multi-object tracking metrics.
//!
//! Per frame, ground-truth objects keep their previous hypothesis while the
//! pair still overlaps at the threshold; the remaining objects are matched by
//! minimum-cost assignment on `1 − IoU`. A ground-truth object matched to a
//! hypothesis other than its last one counts as an identity switch.

use std::collections::{BTreeMap, HashMap, HashSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::BBox;
use crate::tracker::{hungarian, iou, FORBIDDEN};

pub const DEFAULT_MATCH_IOU: f64 = 0.5;
const MOSTLY_TRACKED: f64 = 0.8;
const MOSTLY_LOST: f64 = 0.2;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("duplicate {which} entry for id {id} in frame {frame}")]
    Duplicate { which: &'static str, frame: u64, id: u64 },
    #[error("IoU match threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

/// A box with a known identity (ground truth or tracker hypothesis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtEntry {
    pub frame: u64,
    pub id: u64,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotMetrics {
    pub mota: f64,
    pub motp: f64,
    /// Fraction of ground-truth tracks covered ≥ 80 %.
    pub mt: f64,
    /// Fraction of ground-truth tracks covered ≤ 20 %.
    pub ml: f64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub idsw: u64,
    pub matches: u64,
    pub gt_boxes: u64,
    pub hyp_boxes: u64,
    pub gt_tracks: u64,
}

fn by_frame(entries: &[GtEntry], which: &'static str) -> Result<BTreeMap<u64, Vec<GtEntry>>, EvalError> {
    let mut frames: BTreeMap<u64, Vec<GtEntry>> = BTreeMap::new();
    let mut seen = HashSet::new();
    for e in entries {
        if !seen.insert((e.frame, e.id)) {
            return Err(EvalError::Duplicate {
                which,
                frame: e.frame,
                id: e.id,
            });
        }
        frames.entry(e.frame).or_default().push(*e);
    }
    for v in frames.values_mut() {
        v.sort_by_key(|e| e.id);
    }
    Ok(frames)
}

pub fn evaluate_mot(gt: &[GtEntry], hyp: &[GtEntry], iou_threshold: f64) -> Result<MotMetrics, EvalError> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(EvalError::InvalidThreshold(iou_threshold));
    }
    if gt.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let gt_frames = by_frame(gt, "ground-truth")?;
    let hyp_frames = by_frame(hyp, "hypothesis")?;

    let mut last_match: HashMap<u64, u64> = HashMap::new();
    // gt id → (frames present, frames matched)
    let mut coverage: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    let (mut matches, mut fp, mut fn_, mut idsw) = (0u64, 0u64, 0u64, 0u64);
    let mut iou_sum = 0.0;

    let frames: std::collections::BTreeSet<u64> = gt_frames.keys().chain(hyp_frames.keys()).copied().collect();
    let empty = Vec::new();
    for f in frames {
        let gts = gt_frames.get(&f).unwrap_or(&empty);
        let hyps = hyp_frames.get(&f).unwrap_or(&empty);
        let mut gt_done = vec![false; gts.len()];
        let mut hyp_done = vec![false; hyps.len()];
        let mut frame_matches: Vec<(usize, usize, f64)> = Vec::new();

        // continuity
        for (gi, g) in gts.iter().enumerate() {
            let Some(&hid) = last_match.get(&g.id) else { continue };
            if let Some(hi) = hyps.iter().position(|h| h.id == hid) {
                let o = iou(&g.bbox, &hyps[hi].bbox);
                if !hyp_done[hi] && o >= iou_threshold {
                    gt_done[gi] = true;
                    hyp_done[hi] = true;
                    frame_matches.push((gi, hi, o));
                }
            }
        }

        let gi_free: Vec<usize> = (0..gts.len()).filter(|&i| !gt_done[i]).collect();
        let hi_free: Vec<usize> = (0..hyps.len()).filter(|&i| !hyp_done[i]).collect();
        if !gi_free.is_empty() && !hi_free.is_empty() {
            let ious = DMatrix::from_fn(gi_free.len(), hi_free.len(), |r, c| {
                iou(&gts[gi_free[r]].bbox, &hyps[hi_free[c]].bbox)
            });
            let cost = ious.map(|o| if o >= iou_threshold { 1.0 - o } else { FORBIDDEN });
            for (r, c) in hungarian(&cost).expect("finite costs") {
                let o = ious[(r, c)];
                if o < iou_threshold {
                    continue;
                }
                let (gi, hi) = (gi_free[r], hi_free[c]);
                if last_match.get(&gts[gi].id).is_some_and(|&prev| prev != hyps[hi].id) {
                    idsw += 1;
                }
                frame_matches.push((gi, hi, o));
            }
        }

        for &(gi, hi, o) in &frame_matches {
            last_match.insert(gts[gi].id, hyps[hi].id);
            coverage.entry(gts[gi].id).or_default().1 += 1;
            iou_sum += o;
        }
        for g in gts {
            coverage.entry(g.id).or_default().0 += 1;
        }
        let m = frame_matches.len() as u64;
        matches += m;
        fp += hyps.len() as u64 - m;
        fn_ += gts.len() as u64 - m;
    }

    let gt_boxes = gt.len() as u64;
    let tracks = coverage.len() as f64;
    let ratio = |present: u64, matched: u64| matched as f64 / present as f64;
    let mt = coverage.values().filter(|&&(p, m)| ratio(p, m) >= MOSTLY_TRACKED).count() as f64 / tracks;
    let ml = coverage.values().filter(|&&(p, m)| ratio(p, m) <= MOSTLY_LOST).count() as f64 / tracks;
    Ok(MotMetrics {
        mota: 1.0 - (fn_ + fp + idsw) as f64 / gt_boxes as f64,
        motp: if matches > 0 { iou_sum / matches as f64 } else { 0.0 },
        mt,
        ml,
        fp,
        fn_,
        idsw,
        matches,
        gt_boxes,
        hyp_boxes: hyp.len() as u64,
        gt_tracks: coverage.len() as u64,
    })
}
