//! Deterministic synthetic pedestrian scenes with exact ground truth.
//!
//! Pedestrians walk straight or gently curving paths across a rectangular
//! arena; group members share a path at fixed lateral offsets. Ground truth
//! is extracted from the noiseless paths, and only then are detection noise,
//! misses, false positives and identity splits applied.
//!
//! All randomness comes from ChaCha8 streams seeded with the scenario seed:
//! one for the layout and a second, independent one for the noise, so the
//! same seed yields the same walkers whatever the noise settings.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{BBox, Point2, Vec2};
use crate::mot_eval::GtEntry;
use crate::tracker::Detection;

pub const PED_WIDTH: f64 = 15.0;
pub const PED_HEIGHT: f64 = 30.0;
pub const DEFAULT_THRESHOLD_PX: f64 = 35.0;
const NOISE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;
const MAX_HEADING_DEVIATION: f64 = 0.35;
const MAX_ENTRY_REDRAWS: usize = 50;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("groups need {needed} pedestrians but only {available} are configured")]
    Infeasible { needed: usize, available: usize },
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub size: usize,
    pub offset_px: f64,
}

/// A hand-placed path. Each entry of `offsets` is one pedestrian displaced
/// sideways (to the left of the heading) by that many pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkerSpec {
    pub start_frame: u64,
    pub origin: Point2,
    /// Radians, image axes (y down).
    pub heading: f64,
    /// Pixels per frame.
    pub speed: f64,
    /// Radians per frame.
    pub turn_rate: f64,
    pub offsets: Vec<f64>,
}

impl WalkerSpec {
    pub fn single(start_frame: u64, origin: Point2, heading: f64, speed: f64) -> Self {
        Self {
            start_frame,
            origin,
            heading,
            speed,
            turn_rate: 0.0,
            offsets: vec![0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layout {
    /// Random edge-to-edge crossings. `pedestrians` counts everybody,
    /// group members included.
    Random { pedestrians: usize, groups: Vec<GroupSpec> },
    Scripted(Vec<WalkerSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Standard deviation in pixels applied to box centre and size.
    pub jitter_sigma: f64,
    pub miss_rate: f64,
    /// Expected false positives per true box.
    pub fp_rate: f64,
    /// Probability that an identity is split in two at a random frame.
    pub id_switch_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub arena_width: f64,
    pub arena_height: f64,
    pub fps: f64,
    pub duration_frames: u64,
    pub layout: Layout,
    pub speed_mean: f64,
    pub speed_std: f64,
    /// Maximum curvature of random paths, radians per frame.
    pub max_turn_rate: f64,
    /// Random walkers enter uniformly within `[0, entry_spread_frames]`.
    pub entry_spread_frames: u64,
    /// A random walker's entry point is redrawn while it lies closer than
    /// this to the centre of anyone already on screen.
    pub min_entry_gap_px: f64,
    pub noise: NoiseConfig,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            arena_width: 640.0,
            arena_height: 480.0,
            fps: 15.0,
            duration_frames: 300,
            layout: Layout::Random {
                pedestrians: 10,
                groups: Vec::new(),
            },
            speed_mean: 1.8,
            speed_std: 0.2,
            max_turn_rate: 0.002,
            entry_spread_frames: 0,
            min_entry_gap_px: 2.0 * DEFAULT_THRESHOLD_PX,
            noise: NoiseConfig::default(),
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.into()));
        if !(self.arena_width > 0.0 && self.arena_height > 0.0) {
            return bad("arena must have positive size");
        }
        if !(self.fps > 0.0) {
            return bad("fps must be positive");
        }
        if !(self.speed_mean > 0.0 && self.speed_std >= 0.0 && self.max_turn_rate >= 0.0) {
            return bad("speed mean must be positive; spreads non-negative");
        }
        let n = &self.noise;
        if !(n.jitter_sigma >= 0.0 && n.jitter_sigma.is_finite()) {
            return bad("jitter sigma must be non-negative");
        }
        for (name, r) in [("miss_rate", n.miss_rate), ("fp_rate", n.fp_rate), ("id_switch_rate", n.id_switch_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(SynthError::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        match &self.layout {
            Layout::Random { pedestrians, groups } => {
                if groups.iter().any(|g| !(2..=4).contains(&g.size)) {
                    return bad("group size must be 2 to 4");
                }
                if groups.iter().any(|g| !(g.offset_px >= 0.0)) {
                    return bad("group offset must be non-negative");
                }
                let needed: usize = groups.iter().map(|g| g.size).sum();
                if needed > *pedestrians {
                    return Err(SynthError::Infeasible {
                        needed,
                        available: *pedestrians,
                    });
                }
            }
            Layout::Scripted(ws) => {
                if ws.iter().any(|w| w.offsets.is_empty() || !(w.speed >= 0.0)) {
                    return bad("scripted walkers need a member and a non-negative speed");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationInterval {
    pub pair: [u64; 2],
    pub start_frame: u64,
    pub end_frame: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGroundTruth {
    pub entries: Vec<GtEntry>,
    /// Group id to member ids.
    pub groups: BTreeMap<u64, Vec<u64>>,
    pub intervals: Vec<ViolationInterval>,
    pub fps: f64,
    pub duration_frames: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub detections: Vec<Detection>,
    /// Noisy boxes with identities, as a perfect associator would report
    /// them; split identities get fresh ids. False positives are absent.
    pub tracks: Vec<GtEntry>,
    pub hyp_to_truth: BTreeMap<u64, u64>,
    pub truth: ScenarioGroundTruth,
}

pub fn pedestrian_box(bp: Point2) -> BBox {
    BBox::new(bp.x - PED_WIDTH / 2.0, bp.y - PED_HEIGHT, PED_WIDTH, PED_HEIGHT)
}

fn random_walkers(cfg: &ScenarioConfig, pedestrians: usize, groups: &[GroupSpec], rng: &mut ChaCha8Rng) -> Vec<WalkerSpec> {
    let speed = Normal::new(cfg.speed_mean, cfg.speed_std).expect("validated");
    let singles = pedestrians - groups.iter().map(|g| g.size).sum::<usize>();
    let shapes = groups
        .iter()
        .map(|g| (g.size, g.offset_px))
        .chain(std::iter::repeat_n((1, 0.0), singles));
    let mut placed: Vec<WalkerSpec> = Vec::new();
    for (size, offset) in shapes {
        // checked both ways, since an earlier-placed walker may enter later
        let near = |a: &WalkerSpec, b: &WalkerSpec| {
            centre_at(cfg, a, b.start_frame).is_some_and(|c| c.distance(b.origin) < cfg.min_entry_gap_px)
        };
        let crowded = |w: &WalkerSpec| placed.iter().any(|o| near(o, w) || near(w, o));
        let mut walker = draw_walker(cfg, size, offset, &speed, rng);
        let mut redraws = 0;
        while crowded(&walker) && walker.start_frame < cfg.duration_frames {
            if redraws < MAX_ENTRY_REDRAWS {
                walker = draw_walker(cfg, size, offset, &speed, rng);
                redraws += 1;
            } else {
                // no room anywhere: wait at the last spot until it clears
                walker.start_frame += 1;
            }
        }
        placed.push(walker);
    }
    placed
}

fn draw_walker(cfg: &ScenarioConfig, size: usize, offset: f64, speed: &Normal<f64>, rng: &mut ChaCha8Rng) -> WalkerSpec {
    let (w, h) = (cfg.arena_width, cfg.arena_height);
    let along: f64 = rng.random();
    let (origin, inward) = match rng.random_range(0..4) {
        0 => (Point2::new(0.0, along * h), 0.0),
        1 => (Point2::new(w, along * h), std::f64::consts::PI),
        2 => (Point2::new(along * w, 0.0), std::f64::consts::FRAC_PI_2),
        _ => (Point2::new(along * w, h), -std::f64::consts::FRAC_PI_2),
    };
    let heading = inward + rng.random_range(-MAX_HEADING_DEVIATION..=MAX_HEADING_DEVIATION);
    let turn_rate = if cfg.max_turn_rate > 0.0 {
        rng.random_range(-cfg.max_turn_rate..=cfg.max_turn_rate)
    } else {
        0.0
    };
    let start_frame = rng.random_range(0..=cfg.entry_spread_frames);
    let speed = speed.sample(rng).max(0.3);
    let offsets = (0..size).map(|k| (k as f64 - (size - 1) as f64 / 2.0) * offset).collect();
    WalkerSpec {
        start_frame,
        origin,
        heading,
        speed,
        turn_rate,
        offsets,
    }
}

/// Path centre of `w` at `frame`, if it is on screen then.
fn centre_at(cfg: &ScenarioConfig, w: &WalkerSpec, frame: u64) -> Option<Point2> {
    if frame < w.start_frame {
        return None;
    }
    let (mut pos, mut theta) = (w.origin, w.heading);
    for _ in w.start_frame..frame {
        if !inside(cfg, pos) {
            return None;
        }
        pos = pos + Vec2::new(theta.cos(), theta.sin()) * w.speed;
        theta += w.turn_rate;
    }
    inside(cfg, pos).then_some(pos)
}

fn inside(cfg: &ScenarioConfig, p: Point2) -> bool {
    (0.0..=cfg.arena_width).contains(&p.x) && (0.0..=cfg.arena_height).contains(&p.y)
}

/// Noiseless entries of every walker; ids are assigned from 1 in walker and
/// member order.
fn trace(cfg: &ScenarioConfig, walkers: &[WalkerSpec]) -> (Vec<GtEntry>, BTreeMap<u64, Vec<u64>>) {
    let mut entries = Vec::new();
    let mut groups = BTreeMap::new();
    let mut next_id = 1u64;
    for w in walkers {
        let ids: Vec<u64> = (next_id..next_id + w.offsets.len() as u64).collect();
        next_id += w.offsets.len() as u64;
        if ids.len() > 1 {
            groups.insert(groups.len() as u64, ids.clone());
        }
        let (mut pos, mut theta) = (w.origin, w.heading);
        for frame in w.start_frame..cfg.duration_frames {
            if !inside(cfg, pos) {
                break;
            }
            let normal = Vec2::new(theta.sin(), -theta.cos());
            for (&id, &off) in ids.iter().zip(&w.offsets) {
                entries.push(GtEntry {
                    frame,
                    id,
                    bbox: pedestrian_box(pos + normal * off),
                });
            }
            pos = pos + Vec2::new(theta.cos(), theta.sin()) * w.speed;
            theta += w.turn_rate;
        }
    }
    entries.sort_by_key(|e| (e.frame, e.id));
    (entries, groups)
}

/// Runs of frames in which two pedestrians of different groups stand closer
/// than `threshold`, found by checking every pair in every frame.
pub fn violation_intervals(
    entries: &[GtEntry],
    groups: &BTreeMap<u64, Vec<u64>>,
    threshold: f64,
) -> Vec<ViolationInterval> {
    let group_of: BTreeMap<u64, u64> = groups
        .iter()
        .flat_map(|(&g, ms)| ms.iter().map(move |&m| (m, g)))
        .collect();
    let mut by_frame: BTreeMap<u64, Vec<&GtEntry>> = BTreeMap::new();
    for e in entries {
        by_frame.entry(e.frame).or_default().push(e);
    }
    let mut runs: BTreeMap<(u64, u64), Vec<u64>> = BTreeMap::new();
    for (&frame, es) in &by_frame {
        for (a, ea) in es.iter().enumerate() {
            for eb in &es[a + 1..] {
                let (i, j) = (ea.id.min(eb.id), ea.id.max(eb.id));
                let same = matches!((group_of.get(&i), group_of.get(&j)), (Some(x), Some(y)) if x == y);
                if !same && ea.bbox.bottom_center().distance(eb.bbox.bottom_center()) < threshold {
                    runs.entry((i, j)).or_default().push(frame);
                }
            }
        }
    }
    let mut out = Vec::new();
    for ((i, j), frames) in runs {
        let mut start = frames[0];
        for w in frames.windows(2) {
            if w[1] != w[0] + 1 {
                out.push(ViolationInterval {
                    pair: [i, j],
                    start_frame: start,
                    end_frame: w[0],
                });
                start = w[1];
            }
        }
        out.push(ViolationInterval {
            pair: [i, j],
            start_frame: start,
            end_frame: *frames.last().expect("non-empty"),
        });
    }
    out.sort_by_key(|v| (v.start_frame, v.pair));
    out
}

fn jitter(b: BBox, sigma: f64, rng: &mut ChaCha8Rng) -> BBox {
    if sigma == 0.0 {
        return b;
    }
    let n = Normal::new(0.0, sigma).expect("validated");
    let c = b.center();
    let (cx, cy) = (c.x + n.sample(rng), c.y + n.sample(rng));
    let (w, h) = ((b.w + n.sample(rng)).max(2.0), (b.h + n.sample(rng)).max(2.0));
    BBox::new(cx - w / 2.0, cy - h / 2.0, w, h)
}

pub fn generate(cfg: &ScenarioConfig) -> Result<Scenario, SynthError> {
    cfg.validate()?;
    let mut layout_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let walkers = match &cfg.layout {
        Layout::Random { pedestrians, groups } => random_walkers(cfg, *pedestrians, groups, &mut layout_rng),
        Layout::Scripted(ws) => ws.clone(),
    };
    let (entries, groups) = trace(cfg, &walkers);
    let intervals = violation_intervals(&entries, &groups, DEFAULT_THRESHOLD_PX);

    let noise = cfg.noise;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ NOISE_STREAM);
    let mut observed = Vec::with_capacity(entries.len());
    let mut false_pos: Vec<(u64, BBox)> = Vec::new();
    for e in &entries {
        if noise.miss_rate > 0.0 && rng.random::<f64>() < noise.miss_rate {
            continue;
        }
        observed.push(GtEntry {
            bbox: jitter(e.bbox, noise.jitter_sigma, &mut rng),
            ..*e
        });
        if noise.fp_rate > 0.0 && rng.random::<f64>() < noise.fp_rate {
            let x = rng.random_range(0.0..=(cfg.arena_width - PED_WIDTH).max(0.0));
            let y = rng.random_range(0.0..=(cfg.arena_height - PED_HEIGHT).max(0.0));
            false_pos.push((e.frame, BBox::new(x, y, PED_WIDTH, PED_HEIGHT)));
        }
    }

    // identity splits
    let truth_ids: BTreeSet<u64> = entries.iter().map(|e| e.id).collect();
    let mut next_id = truth_ids.last().map_or(1, |m| m + 1);
    let mut hyp_to_truth: BTreeMap<u64, u64> = truth_ids.iter().map(|&id| (id, id)).collect();
    let mut split_at: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    if noise.id_switch_rate > 0.0 {
        let mut frames_of: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for o in &observed {
            frames_of.entry(o.id).or_default().push(o.frame);
        }
        for (id, frames) in frames_of {
            if frames.len() >= 2 && rng.random::<f64>() < noise.id_switch_rate {
                let at = frames[rng.random_range(1..frames.len())];
                split_at.insert(id, (at, next_id));
                hyp_to_truth.insert(next_id, id);
                next_id += 1;
            }
        }
    }
    let tracks: Vec<GtEntry> = observed
        .iter()
        .map(|o| match split_at.get(&o.id) {
            Some(&(at, fresh)) if o.frame >= at => GtEntry { id: fresh, ..*o },
            _ => *o,
        })
        .collect();
    let present: BTreeSet<u64> = tracks.iter().map(|t| t.id).collect();
    hyp_to_truth.retain(|h, _| present.contains(h));

    let mut detections: Vec<Detection> = tracks
        .iter()
        .map(|t| (t.frame, t.bbox))
        .chain(false_pos)
        .map(|(frame, bbox)| Detection {
            frame,
            bbox,
            conf: 1.0,
            class_id: 1,
        })
        .collect();
    detections.sort_by_key(|d| d.frame);

    Ok(Scenario {
        detections,
        tracks,
        hyp_to_truth,
        truth: ScenarioGroundTruth {
            entries,
            groups,
            intervals,
            fps: cfg.fps,
            duration_frames: cfg.duration_frames,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scripted(walkers: Vec<WalkerSpec>, duration: u64) -> ScenarioConfig {
        ScenarioConfig {
            layout: Layout::Scripted(walkers),
            duration_frames: duration,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn zero_pedestrians_is_empty() {
        let cfg = ScenarioConfig {
            layout: Layout::Random {
                pedestrians: 0,
                groups: vec![],
            },
            ..ScenarioConfig::default()
        };
        let s = generate(&cfg).unwrap();
        assert!(s.detections.is_empty() && s.truth.entries.is_empty() && s.truth.intervals.is_empty());
    }

    #[test]
    fn head_on_pair_gives_one_interval() {
        // 10 px lateral gap, closing at 2 px/frame: close for about 33 frames
        let cfg = scripted(
            vec![
                WalkerSpec::single(0, Point2::new(100.0, 200.0), 0.0, 1.0),
                WalkerSpec::single(0, Point2::new(500.0, 210.0), std::f64::consts::PI, 1.0),
            ],
            300,
        );
        let s = generate(&cfg).unwrap();
        assert_eq!(s.truth.intervals.len(), 1);
        let iv = s.truth.intervals[0];
        assert_eq!(iv.pair, [1, 2]);
        assert!((iv.end_frame - iv.start_frame + 1) as f64 >= cfg.fps);
    }

    #[test]
    fn lone_group_has_no_intervals() {
        let cfg = scripted(
            vec![WalkerSpec {
                offsets: vec![-20.0, 0.0, 20.0],
                ..WalkerSpec::single(0, Point2::new(0.0, 240.0), 0.0, 1.8)
            }],
            300,
        );
        let s = generate(&cfg).unwrap();
        assert_eq!(s.truth.groups, BTreeMap::from([(0, vec![1, 2, 3])]));
        assert!(s.truth.intervals.is_empty());
        // members keep their 20 px spacing
        let f0: Vec<_> = s.truth.entries.iter().filter(|e| e.frame == 0).collect();
        assert!((f0[0].bbox.bottom_center().distance(f0[1].bbox.bottom_center()) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_groups_rejected() {
        let cfg = ScenarioConfig {
            layout: Layout::Random {
                pedestrians: 3,
                groups: vec![GroupSpec { size: 4, offset_px: 20.0 }],
            },
            ..ScenarioConfig::default()
        };
        assert_eq!(generate(&cfg), Err(SynthError::Infeasible { needed: 4, available: 3 }));
    }

    #[test]
    fn walkers_leave_for_good() {
        let cfg = scripted(vec![WalkerSpec::single(5, Point2::new(630.0, 100.0), 0.0, 2.0)], 100);
        let s = generate(&cfg).unwrap();
        let frames: Vec<u64> = s.truth.entries.iter().map(|e| e.frame).collect();
        assert_eq!(frames, (5..=10).collect::<Vec<_>>());
    }

    #[test]
    fn full_split_doubles_identities() {
        let cfg = ScenarioConfig {
            noise: NoiseConfig {
                id_switch_rate: 1.0,
                ..NoiseConfig::default()
            },
            seed: 4,
            ..ScenarioConfig::default()
        };
        let s = generate(&cfg).unwrap();
        let truth: BTreeSet<u64> = s.truth.entries.iter().map(|e| e.id).collect();
        let hyp: BTreeSet<u64> = s.tracks.iter().map(|e| e.id).collect();
        assert_eq!(hyp.len(), 2 * truth.len());
        assert_eq!(s.hyp_to_truth.len(), hyp.len());
        for t in &s.tracks {
            let gt = s.truth.entries.iter().find(|e| e.frame == t.frame && e.id == s.hyp_to_truth[&t.id]);
            assert_eq!(gt.unwrap().bbox, t.bbox);
        }
    }

    fn arb_config() -> impl Strategy<Value = ScenarioConfig> {
        (any::<u64>(), 0usize..12, 0u64..60, 0f64..2.0, 0f64..0.3, 0f64..0.3, 0f64..0.5).prop_map(
            |(seed, peds, spread, sigma, miss, fp, sw)| ScenarioConfig {
                seed,
                duration_frames: 200,
                entry_spread_frames: spread,
                layout: Layout::Random {
                    pedestrians: peds,
                    groups: if peds >= 3 {
                        vec![GroupSpec { size: 3, offset_px: 15.0 }]
                    } else {
                        vec![]
                    },
                },
                noise: NoiseConfig {
                    jitter_sigma: sigma,
                    miss_rate: miss,
                    fp_rate: fp,
                    id_switch_rate: sw,
                },
                ..ScenarioConfig::default()
            },
        )
    }

    fn brute_force_close(s: &ScenarioGroundTruth) -> BTreeSet<(u64, u64, u64)> {
        let mut frames: BTreeMap<u64, Vec<&GtEntry>> = BTreeMap::new();
        for e in &s.entries {
            frames.entry(e.frame).or_default().push(e);
        }
        let mut out = BTreeSet::new();
        for es in frames.values() {
            for a in es {
                for b in es {
                    let grouped = s.groups.values().any(|g| g.contains(&a.id) && g.contains(&b.id));
                    if a.id < b.id
                        && !grouped
                        && a.bbox.bottom_center().distance(b.bbox.bottom_center()) < DEFAULT_THRESHOLD_PX
                    {
                        out.insert((a.frame, a.id, b.id));
                    }
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn deterministic(cfg in arb_config()) {
            prop_assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        }

        #[test]
        fn intervals_match_brute_force(cfg in arb_config()) {
            let s = generate(&cfg).unwrap();
            let mut from_intervals = BTreeSet::new();
            for iv in &s.truth.intervals {
                prop_assert!(iv.end_frame < cfg.duration_frames);
                prop_assert!(!s.truth.groups.values().any(|g| g.contains(&iv.pair[0]) && g.contains(&iv.pair[1])));
                for f in iv.start_frame..=iv.end_frame {
                    prop_assert!(from_intervals.insert((f, iv.pair[0], iv.pair[1])));
                }
            }
            prop_assert_eq!(from_intervals, brute_force_close(&s.truth));
        }

        #[test]
        fn noise_free_detections_equal_truth(mut cfg in arb_config()) {
            cfg.noise = NoiseConfig::default();
            let s = generate(&cfg).unwrap();
            let det: Vec<(u64, BBox)> = s.detections.iter().map(|d| (d.frame, d.bbox)).collect();
            let gt: Vec<(u64, BBox)> = s.truth.entries.iter().map(|e| (e.frame, e.bbox)).collect();
            prop_assert_eq!(det, gt);
            prop_assert_eq!(&s.tracks, &s.truth.entries);
        }

        #[test]
        fn layout_independent_of_noise(cfg in arb_config()) {
            let quiet = ScenarioConfig { noise: NoiseConfig::default(), ..cfg.clone() };
            prop_assert_eq!(generate(&cfg).unwrap().truth, generate(&quiet).unwrap().truth);
        }

        #[test]
        fn nobody_enters_beside_someone(seed in any::<u64>(), peds in 1usize..25, spread in 0u64..80) {
            let cfg = ScenarioConfig {
                seed,
                duration_frames: 200,
                entry_spread_frames: spread,
                layout: Layout::Random { pedestrians: peds, groups: vec![] },
                ..ScenarioConfig::default()
            };
            let truth = generate(&cfg).unwrap().truth;
            let mut first: BTreeMap<u64, GtEntry> = BTreeMap::new();
            for e in &truth.entries {
                first.entry(e.id).or_insert(*e);
            }
            for (id, entry) in &first {
                for other in truth.entries.iter().filter(|o| o.frame == entry.frame && o.id != *id) {
                    let d = other.bbox.bottom_center().distance(entry.bbox.bottom_center());
                    prop_assert!(d >= cfg.min_entry_gap_px, "{} entered {:.1} px from {}", id, d, other.id);
                }
            }
        }
    }
}
