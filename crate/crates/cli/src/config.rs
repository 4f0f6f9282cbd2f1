//! Flat `key = value` configuration with `#` comments.
//!
//! Paths read from a file resolve against that file's directory; paths given
//! with `--set` resolve against the working directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use socdist::analysis::AnalysisConfig;
use socdist::frame_prep::{estimate_homography, CropRect, Homography, Interpolation};
use socdist::geom::Point2;
use socdist::sda::SdaConfig;
use socdist::synth::{GroupSpec, Layout, NoiseConfig, ScenarioConfig};
use socdist::tracker::TrackerConfig;

pub const KEYS: &[&str] = &[
    // paths
    "images_dir",
    "detections",
    "tracks",
    "gt",
    "groups",
    "output_dir",
    // preprocessing
    "alpha",
    "wmbs_window",
    "homography",
    "correspondences",
    "crop",
    "output_width",
    "output_height",
    "interpolation",
    // tracking
    "detections_space",
    "iou_threshold",
    "max_age",
    "min_hits",
    "process_noise_scale",
    "measurement_noise_scale",
    // analysis
    "fps",
    "distance_threshold_px",
    "gamma",
    "lambda",
    "velocity_threshold",
    "stability_threshold",
    "ewa_alpha",
    "use_ewa",
    "use_velocity_compare",
    "min_event_seconds",
    "merge_gap_frames",
    "trajectory_window_frames",
    "duration_bandwidth",
    "angle_bandwidth",
    "at_gt_seconds",
    "invert_volume_ratio",
    "slot_label",
    // evaluation
    "mot_iou",
    // synthetic scenes
    "seed",
    "arena_width",
    "arena_height",
    "duration_frames",
    "pedestrians",
    "group_count",
    "group_size",
    "group_offset_px",
    "speed_mean",
    "speed_std",
    "max_turn_rate",
    "entry_spread_frames",
    "min_entry_gap_px",
    "jitter_sigma",
    "miss_rate",
    "fp_rate",
    "id_switch_rate",
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    base: PathBuf,
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
    /// Where the config came from, for diagnostics.
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionSpace {
    Calibrated,
    Raw,
}

impl Config {
    pub fn empty(source: &str) -> Self {
        Self {
            entries: BTreeMap::new(),
            source: source.to_string(),
        }
    }

    pub fn parse(text: &str, base: &Path, source: &str) -> Result<Self> {
        let mut cfg = Self::empty(source);
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{source}:{}: expected `key = value`", n + 1))?;
            cfg.set(k.trim(), v.trim(), base)
                .with_context(|| format!("{source}:{}", n + 1))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        if !KEYS.contains(&key) {
            bail!("unknown config key `{key}`");
        }
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                base: base.to_path_buf(),
            },
        );
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{kv}` is not `key=value`"))?;
        self.set(k.trim(), v.trim(), Path::new(""))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("config key `{key}` = {v:?}: {e}")))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| anyhow!("config key `{key}` is required"))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.entries.get(key).map(|e| e.base.join(&e.value))
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf> {
        self.path(key)
            .ok_or_else(|| anyhow!("config key `{key}` is required"))
    }

    fn reals(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        v.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| anyhow!("config key `{key}`: {s:?}: {e}"))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// From `homography` (nine row-major reals) or `correspondences`
    /// (`sx,sy>dx,dy` items separated by `;`); identity when neither is set.
    pub fn homography(&self) -> Result<Homography> {
        match (self.reals("homography")?, self.raw("correspondences")) {
            (Some(_), Some(_)) => bail!("set only one of `homography` and `correspondences`"),
            (Some(v), None) => {
                let arr: [f64; 9] = v
                    .try_into()
                    .map_err(|v: Vec<f64>| anyhow!("`homography` needs 9 numbers, got {}", v.len()))?;
                Homography::from_row_major(&arr).context("invalid homography")
            }
            (None, Some(c)) => {
                let pairs = c
                    .split(';')
                    .filter(|s| !s.trim().is_empty())
                    .map(|item| {
                        let (s, d) = item
                            .split_once('>')
                            .ok_or_else(|| anyhow!("correspondence {item:?} is not `sx,sy>dx,dy`"))?;
                        Ok((point(s)?, point(d)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                estimate_homography(&pairs).context("estimating homography from correspondences")
            }
            (None, None) => Ok(Homography::identity()),
        }
    }

    pub fn crop(&self, width: u32, height: u32) -> Result<CropRect> {
        match self.reals("crop")? {
            None => Ok(CropRect::full(width, height)),
            Some(v) if v.len() == 4 && v.iter().all(|x| *x >= 0.0 && x.fract() == 0.0) => {
                Ok(CropRect::new(v[0] as u32, v[1] as u32, v[2] as u32, v[3] as u32))
            }
            Some(_) => bail!("`crop` needs four non-negative integers x,y,w,h"),
        }
    }

    pub fn interpolation(&self) -> Result<Interpolation> {
        match self.raw("interpolation").unwrap_or("bilinear") {
            "bilinear" => Ok(Interpolation::Bilinear),
            "nearest" => Ok(Interpolation::Nearest),
            other => bail!("`interpolation` must be bilinear or nearest, not {other:?}"),
        }
    }

    pub fn detection_space(&self) -> Result<DetectionSpace> {
        match self.raw("detections_space").unwrap_or("calibrated") {
            "calibrated" => Ok(DetectionSpace::Calibrated),
            "raw" => Ok(DetectionSpace::Raw),
            other => bail!("`detections_space` must be calibrated or raw, not {other:?}"),
        }
    }

    pub fn tracker(&self) -> Result<TrackerConfig> {
        let d = TrackerConfig::default();
        Ok(TrackerConfig {
            iou_threshold: self.get_or("iou_threshold", d.iou_threshold)?,
            max_age: self.get_or("max_age", d.max_age)?,
            min_hits: self.get_or("min_hits", d.min_hits)?,
            process_noise_scale: self.get_or("process_noise_scale", d.process_noise_scale)?,
            measurement_noise_scale: self.get_or("measurement_noise_scale", d.measurement_noise_scale)?,
        })
    }

    /// Analysis settings; `fps` must be given explicitly.
    pub fn sda(&self) -> Result<SdaConfig> {
        let d = SdaConfig::default();
        let fps: f64 = self
            .get("fps")?
            .ok_or_else(|| anyhow!("config key `fps` is required for analysis"))?;
        Ok(SdaConfig {
            distance_threshold_px: self.get_or("distance_threshold_px", d.distance_threshold_px)?,
            gamma: self.get_or("gamma", d.gamma)?,
            lambda: self.get_or("lambda", d.lambda)?,
            velocity_threshold: self.get_or("velocity_threshold", d.velocity_threshold)?,
            stability_threshold: self.get_or("stability_threshold", d.stability_threshold)?,
            ewa_alpha: self.get_or("ewa_alpha", d.ewa_alpha)?,
            use_ewa: self.get_or("use_ewa", d.use_ewa)?,
            use_velocity_compare: self.get_or("use_velocity_compare", d.use_velocity_compare)?,
            min_event_seconds: self.get_or("min_event_seconds", d.min_event_seconds)?,
            fps,
            merge_gap_frames: self.get_or("merge_gap_frames", d.merge_gap_frames)?,
            trajectory_window_frames: self.get("trajectory_window_frames")?,
        })
    }

    pub fn analysis(&self) -> Result<AnalysisConfig> {
        let d = AnalysisConfig::default();
        Ok(AnalysisConfig {
            sda: self.sda()?,
            duration_bandwidth: self.get_or("duration_bandwidth", d.duration_bandwidth)?,
            angle_bandwidth: self.get_or("angle_bandwidth", d.angle_bandwidth)?,
            histogram_bin_seconds: d.histogram_bin_seconds,
            at_gt_seconds: self.get("at_gt_seconds")?,
            invert_volume_ratio: self.get_or("invert_volume_ratio", d.invert_volume_ratio)?,
            slot_label: self.get_or("slot_label", d.slot_label)?,
        })
    }

    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let d = ScenarioConfig::default();
        let group_count: usize = self.get_or("group_count", 0)?;
        let group = GroupSpec {
            size: self.get_or("group_size", 2)?,
            offset_px: self.get_or("group_offset_px", 20.0)?,
        };
        Ok(ScenarioConfig {
            arena_width: self.get_or("arena_width", d.arena_width)?,
            arena_height: self.get_or("arena_height", d.arena_height)?,
            fps: self.get_or("fps", d.fps)?,
            duration_frames: self.get_or("duration_frames", d.duration_frames)?,
            layout: Layout::Random {
                pedestrians: self.get_or("pedestrians", 10)?,
                groups: vec![group; group_count],
            },
            speed_mean: self.get_or("speed_mean", d.speed_mean)?,
            speed_std: self.get_or("speed_std", d.speed_std)?,
            max_turn_rate: self.get_or("max_turn_rate", d.max_turn_rate)?,
            entry_spread_frames: self.get_or("entry_spread_frames", d.entry_spread_frames)?,
            min_entry_gap_px: self.get_or("min_entry_gap_px", d.min_entry_gap_px)?,
            noise: NoiseConfig {
                jitter_sigma: self.get_or("jitter_sigma", 0.0)?,
                miss_rate: self.get_or("miss_rate", 0.0)?,
                fp_rate: self.get_or("fp_rate", 0.0)?,
                id_switch_rate: self.get_or("id_switch_rate", 0.0)?,
            },
            seed: self.get_or("seed", d.seed)?,
        })
    }
}

fn point(s: &str) -> Result<Point2> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("point {s:?} is not `x,y`"))?;
    Ok(Point2::new(x.trim().parse()?, y.trim().parse()?))
}
