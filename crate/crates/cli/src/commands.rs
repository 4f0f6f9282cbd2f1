use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use socdist::analysis::analyze as run_analysis;
use socdist::frame_prep::{
    center_crop, compute_mean_frame, compute_windowed_mean, read_pnm, warp_bbox, warp_frame, wmbs_apply, write_pnm,
    DEFAULT_ALPHA,
};
use socdist::mot_csv::{read_mot, write_mot, MotRecord};
use socdist::mot_eval::{evaluate_mot, GtEntry, DEFAULT_MATCH_IOU};
use socdist::sda::{find_all_violation_pairs, group_validate, StateHistory, ViolationEvent, ViolationPair};
use socdist::stats::{group_validation_metrics, map_hyp_to_gt, GroupGt, GroupMetrics, HistBin, KdeCurve};
use socdist::synth::generate;
use socdist::tracker::{track_all, Detection, TrackOutput};

use crate::config::{Config, DetectionSpace};

fn output_dir(cfg: &Config) -> Result<PathBuf> {
    let dir = cfg.require_path("output_dir")?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn read_records(path: &Path) -> Result<Vec<MotRecord>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_mot(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn write_records(path: &Path, records: &[MotRecord]) -> Result<()> {
    write_mot(create(path)?, records).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn identified(records: &[MotRecord], path: &Path) -> Result<Vec<GtEntry>> {
    records
        .iter()
        .map(|r| {
            r.to_gt()
                .with_context(|| format!("{}: frame {} has a row without an id", path.display(), r.frame + 1))
        })
        .collect()
}

fn to_tracks(entries: &[GtEntry]) -> Vec<TrackOutput> {
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

/// Ground-truth sidecar written next to synthetic MOT files. Frames are
/// 1-based like the MOT files.
#[derive(Debug, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub fps: f64,
    pub duration_frames: u64,
    pub groups: BTreeMap<u64, Vec<u64>>,
    #[serde(default)]
    pub intervals: Vec<IntervalOut>,
    #[serde(default)]
    pub hyp_to_truth: BTreeMap<u64, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalOut {
    pub pair: [u64; 2],
    pub start_frame: u64,
    pub end_frame: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventOut {
    pub pair: [u64; 2],
    pub start_frame: u64,
    pub end_frame: u64,
    pub duration_s: f64,
}

impl From<&ViolationEvent> for EventOut {
    fn from(e: &ViolationEvent) -> Self {
        Self {
            pair: e.pair,
            start_frame: e.start_frame + 1,
            end_frame: e.end_frame + 1,
            duration_s: e.duration_s,
        }
    }
}

pub fn synth(cfg: &Config) -> Result<()> {
    let scenario = cfg.scenario()?;
    let s = generate(&scenario)?;
    let dir = output_dir(cfg)?;
    let dets: Vec<MotRecord> = s.detections.iter().map(MotRecord::from_detection).collect();
    write_records(&dir.join("detections.txt"), &dets)?;
    let gt: Vec<MotRecord> = s.truth.entries.iter().map(MotRecord::from_gt).collect();
    write_records(&dir.join("gt.txt"), &gt)?;
    let labelled: Vec<MotRecord> = s.tracks.iter().map(MotRecord::from_gt).collect();
    write_records(&dir.join("labelled_tracks.txt"), &labelled)?;
    let truth = GroundTruthFile {
        fps: s.truth.fps,
        duration_frames: s.truth.duration_frames,
        groups: s.truth.groups.clone(),
        intervals: s
            .truth
            .intervals
            .iter()
            .map(|v| IntervalOut {
                pair: v.pair,
                start_frame: v.start_frame + 1,
                end_frame: v.end_frame + 1,
            })
            .collect(),
        hyp_to_truth: s.hyp_to_truth.clone(),
    };
    write_json(&dir.join("groundtruth.json"), &truth)
}

fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("pgm" | "ppm")));
    files.sort();
    if files.is_empty() {
        bail!("no .pgm or .ppm files in {}", dir.display());
    }
    Ok(files)
}

/// Background subtraction, then calibration warp, then crop.
pub fn preprocess(cfg: &Config) -> Result<()> {
    let files = image_files(&cfg.require_path("images_dir")?)?;
    let frames = files
        .iter()
        .enumerate()
        .map(|(i, p)| read_pnm(p, i as u64).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let alpha: f64 = cfg.get_or("alpha", DEFAULT_ALPHA)?;
    let window: usize = cfg.get_or("wmbs_window", 0)?;
    let h = cfg.homography()?;
    let interp = cfg.interpolation()?;
    let (w0, h0, _) = frames[0].dims();
    let out_w: u32 = cfg.get_or("output_width", w0)?;
    let out_h: u32 = cfg.get_or("output_height", h0)?;
    let crop = cfg.crop(out_w, out_h)?;
    let dir = output_dir(cfg)?.join("frames");
    fs::create_dir_all(&dir)?;

    let full_mean = if window == 0 { Some(compute_mean_frame(&frames)?) } else { None };
    for (i, frame) in frames.iter().enumerate() {
        let windowed;
        let mean = match &full_mean {
            Some(m) => m,
            None => {
                windowed = compute_windowed_mean(&frames, i, window)?;
                &windowed
            }
        };
        let fg = wmbs_apply(frame, mean, alpha)?;
        let warped = warp_frame(&h, &fg, out_w, out_h, interp)?;
        let out = center_crop(&warped, crop)?;
        let ext = if out.channels() == 1 { "pgm" } else { "ppm" };
        let path = dir.join(format!("{:06}.{ext}", i + 1));
        write_pnm(&path, &out).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn track(cfg: &Config) -> Result<()> {
    let path = cfg.require_path("detections")?;
    let records = read_records(&path)?;
    if let Some(w) = records.windows(2).find(|w| w[1].frame < w[0].frame) {
        bail!(
            "{}: frame {} appears after frame {}; detections must be in frame order",
            path.display(),
            w[1].frame + 1,
            w[0].frame + 1
        );
    }
    let mut dets: Vec<Detection> = records.iter().map(MotRecord::to_detection).collect();
    if cfg.detection_space()? == DetectionSpace::Raw {
        let h = cfg.homography()?;
        let crop = cfg.crop(u32::MAX, u32::MAX)?;
        for d in &mut dets {
            let mut b = warp_bbox(&h, &d.bbox)?;
            b.x -= f64::from(crop.x);
            b.y -= f64::from(crop.y);
            d.bbox = b;
        }
    }
    let tracks = track_all(cfg.tracker()?, &dets)?;
    let out: Vec<MotRecord> = tracks.iter().map(MotRecord::from_track).collect();
    write_records(&output_dir(cfg)?.join("tracks.txt"), &out)
}

fn write_curve(path: &Path, curve: Option<&KdeCurve>) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x,density")?;
    if let Some(c) = curve {
        for (x, d) in c.grid.iter().zip(&c.density) {
            writeln!(w, "{x},{d}")?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_histogram(path: &Path, bins: &[HistBin]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "bin_start,bin_end,count")?;
    for b in bins {
        writeln!(w, "{},{},{}", b.bin_start, b.bin_end, b.count)?;
    }
    w.flush()?;
    Ok(())
}

fn read_tracks(cfg: &Config) -> Result<Vec<TrackOutput>> {
    let path = cfg.require_path("tracks")?;
    let records = read_records(&path)?;
    Ok(to_tracks(&identified(&records, &path)?))
}

pub fn analyze(cfg: &Config) -> Result<()> {
    let acfg = cfg.analysis()?;
    let tracks = read_tracks(cfg)?;
    let a = run_analysis(&tracks, &acfg)?;
    let dir = output_dir(cfg)?;
    let mut w = create(&dir.join("events.jsonl"))?;
    for e in &a.events {
        serde_json::to_writer(&mut w, &EventOut::from(e))?;
        writeln!(w)?;
    }
    w.flush()?;
    let mut report = serde_json::to_value(&a.report)?;
    report["events"] = serde_json::to_value(a.events.iter().map(EventOut::from).collect::<Vec<_>>())?;
    write_json(&dir.join("report.json"), &report)?;
    write_histogram(&dir.join("duration_histogram.csv"), &a.report.duration_histogram)?;
    write_curve(&dir.join("duration_kde.csv"), a.report.duration_kde.as_ref())?;
    write_curve(&dir.join("angle_kde.csv"), a.report.angles.kde.as_ref())
}

pub fn eval_mot(cfg: &Config) -> Result<()> {
    let gt_path = cfg.require_path("gt")?;
    let gt = identified(&read_records(&gt_path)?, &gt_path)?;
    let hyp_path = cfg.require_path("tracks")?;
    let hyp = identified(&read_records(&hyp_path)?, &hyp_path)?;
    let m = evaluate_mot(&gt, &hyp, cfg.get_or("mot_iou", DEFAULT_MATCH_IOU)?)?;
    eprintln!(
        "MOTA {:.4}  MOTP {:.4}  IDSW {}  FP {}  FN {}",
        m.mota, m.motp, m.idsw, m.fp, m.fn_
    );
    write_json(&output_dir(cfg)?.join("mot_metrics.json"), &m)
}

/// Validation on the tracks, scored against annotated groups. Track ids are
/// mapped to ground-truth ids per frame by box overlap; removed pairs whose
/// members cannot be mapped count as false positives.
pub fn eval_groups(cfg: &Config) -> Result<()> {
    let sda = cfg.sda()?;
    sda.validate()?;
    let gt_path = cfg.require_path("gt")?;
    let gt = identified(&read_records(&gt_path)?, &gt_path)?;
    let groups_path = cfg.require_path("groups")?;
    let truth: GroundTruthFile = serde_json::from_reader(BufReader::new(
        File::open(&groups_path).with_context(|| format!("opening {}", groups_path.display()))?,
    ))
    .with_context(|| format!("parsing {}", groups_path.display()))?;
    let tracks = read_tracks(cfg)?;

    let history = StateHistory::from_tracks(&tracks, &sda)?;
    let pairs = find_all_violation_pairs(&history, sda.distance_threshold_px);
    let removed = group_validate(&history, &pairs, &sda)?.removed;
    let hyp: Vec<GtEntry> = tracks
        .iter()
        .map(|t| GtEntry {
            frame: t.frame,
            id: t.id,
            bbox: t.bbox,
        })
        .collect();
    let id_map = map_hyp_to_gt(&gt, &hyp, cfg.get_or("mot_iou", DEFAULT_MATCH_IOU)?);
    let translated: Vec<ViolationPair> = removed
        .iter()
        .filter_map(|p| {
            Some(ViolationPair {
                frame: p.frame,
                i: *id_map.get(&(p.frame, p.i))?,
                j: *id_map.get(&(p.frame, p.j))?,
            })
        })
        .collect();
    let unmapped = (removed.len() - translated.len()) as u64;
    let group_gt = GroupGt::new(&gt, &truth.groups);
    let m = group_validation_metrics(&translated, &group_gt, sda.distance_threshold_px)?;
    let m = if unmapped > 0 {
        GroupMetrics::from_counts(m.tp, m.fp + unmapped, m.fn_)?
    } else {
        m
    };
    eprintln!("precision {:.4}  recall {:.4}  F1 {:.4}", m.precision, m.recall, m.f1);
    write_json(&output_dir(cfg)?.join("group_metrics.json"), &m)
}
