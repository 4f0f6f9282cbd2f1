//! Pairwise similarity measures used to recognise pedestrians walking
//! together.

use super::{Result, SdaConfig, SdaError, TrajPoint};
use crate::geom::Vec2;

/// `1 − cos θ` between two non-zero vectors, in `[0, 2]`.
pub fn cosine_distance(v1: Vec2, v2: Vec2) -> Result<f64> {
    let (n1, n2) = (v1.norm(), v2.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return Err(SdaError::ZeroVector);
    }
    let cos = (v1.dot(v2) / (n1 * n2)).clamp(-1.0, 1.0);
    Ok(1.0 - cos)
}

/// `|‖v1‖ − ‖v2‖| / max(‖v1‖, ‖v2‖)`, in `[0, 1]`.
pub fn magnitude_distance(v1: Vec2, v2: Vec2) -> Result<f64> {
    let (n1, n2) = (v1.norm(), v2.norm());
    let m = n1.max(n2);
    if m == 0.0 {
        return Err(SdaError::ZeroVector);
    }
    Ok((n1 - n2).abs() / m)
}

/// `γ·cosine + (1 − γ)·magnitude`.
///
/// Total over all inputs: two stationary objects are at distance 0, and when
/// exactly one is stationary the direction term is dropped, leaving
/// `(1 − γ)·1`.
pub fn velocity_distance(v1: Vec2, v2: Vec2, gamma: f64) -> f64 {
    match (v1.is_zero(), v2.is_zero()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0 - gamma,
        (false, false) => {
            let cos = cosine_distance(v1, v2).expect("non-zero");
            let mag = magnitude_distance(v1, v2).expect("non-zero");
            gamma * cos + (1.0 - gamma) * mag
        }
    }
}

/// Ground-point distances at every frame both trajectories cover, in frame
/// order.
pub fn shared_distances(a: &[TrajPoint], b: &[TrajPoint]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].frame.cmp(&b[j].frame) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i].bp.distance(b[j].bp));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn mean(d: &[f64]) -> f64 {
    d.iter().sum::<f64>() / d.len() as f64
}

/// Mean separation over the shared frames.
pub fn trajectory_similarity(a: &[TrajPoint], b: &[TrajPoint]) -> Result<f64> {
    let d = shared_distances(a, b);
    if d.is_empty() {
        return Err(SdaError::NoCommonFrames);
    }
    Ok(mean(&d))
}

/// Population standard deviation of the separation divided by its mean; 0
/// when the mean is 0.
pub fn trajectory_stability(a: &[TrajPoint], b: &[TrajPoint]) -> Result<f64> {
    let d = shared_distances(a, b);
    if d.len() < 2 {
        return Err(SdaError::TooFewCommonFrames(d.len()));
    }
    let mu = mean(&d);
    if mu == 0.0 {
        return Ok(0.0);
    }
    let var = d.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / d.len() as f64;
    Ok(var.sqrt() / mu)
}

/// True when the pair stays close on average or keeps a steady separation.
/// A measure whose precondition fails counts as not satisfied.
pub fn trajectory_compare(a: &[TrajPoint], b: &[TrajPoint], cfg: &SdaConfig) -> bool {
    let close = trajectory_similarity(a, b).is_ok_and(|s| s <= cfg.distance_threshold_px);
    close || trajectory_stability(a, b).is_ok_and(|s| s <= cfg.stability_threshold)
}

pub fn velocity_compare(v1: Vec2, v2: Vec2, cfg: &SdaConfig) -> bool {
    velocity_distance(v1, v2, cfg.gamma) <= cfg.velocity_threshold
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;
    use proptest::prelude::*;

    fn traj(points: &[(u64, f64, f64)]) -> Vec<TrajPoint> {
        points
            .iter()
            .map(|&(f, x, y)| TrajPoint {
                frame: f,
                bp: Point2::new(x, y),
            })
            .collect()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_distance(Vec2::new(1.0, 0.0), Vec2::new(3.0, 0.0)).unwrap(), 0.0);
        assert_eq!(cosine_distance(Vec2::new(1.0, 0.0), Vec2::new(-2.0, 0.0)).unwrap(), 2.0);
        assert_eq!(cosine_distance(Vec2::new(1.0, 0.0), Vec2::new(0.0, 5.0)).unwrap(), 1.0);
        assert_eq!(cosine_distance(Vec2::ZERO, Vec2::new(0.0, 5.0)), Err(SdaError::ZeroVector));
    }

    #[test]
    fn magnitude_examples() {
        assert_eq!(magnitude_distance(Vec2::new(3.0, 4.0), Vec2::new(0.0, 5.0)).unwrap(), 0.0);
        assert_eq!(magnitude_distance(Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)).unwrap(), 0.5);
        assert_eq!(magnitude_distance(Vec2::new(1.0, 0.0), Vec2::ZERO).unwrap(), 1.0);
        assert_eq!(magnitude_distance(Vec2::ZERO, Vec2::ZERO), Err(SdaError::ZeroVector));
    }

    #[test]
    fn velocity_distance_examples() {
        let v = Vec2::new(1.3, -0.4);
        assert!(velocity_distance(v, v, 0.1).abs() < 1e-12);
        assert!((velocity_distance(Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0), 0.1) - 0.45).abs() < 1e-9);
        assert!((velocity_distance(Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0), 0.1) - 0.2).abs() < 1e-9);
        assert_eq!(velocity_distance(Vec2::ZERO, Vec2::ZERO, 0.1), 0.0);
        assert!((velocity_distance(Vec2::ZERO, Vec2::new(1.0, 1.0), 0.1) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn velocity_compare_examples() {
        let cfg = SdaConfig::default();
        assert!(velocity_compare(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0), &cfg));
        // head-on at equal speed scores 0.2 and slips under 0.21
        assert!(velocity_compare(Vec2::new(1.5, 0.0), Vec2::new(-1.5, 0.0), &cfg));
        assert!(!velocity_compare(Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0), &cfg));
    }

    #[test]
    fn similarity_examples() {
        let a = traj(&[(0, 0.0, 0.0), (1, 1.0, 0.0), (2, 2.0, 0.0)]);
        assert_eq!(trajectory_similarity(&a, &a).unwrap(), 0.0);
        let b: Vec<TrajPoint> = a
            .iter()
            .map(|p| TrajPoint {
                frame: p.frame,
                bp: Point2::new(p.bp.x, p.bp.y + 35.0),
            })
            .collect();
        assert_eq!(trajectory_similarity(&a, &b).unwrap(), 35.0);
        let far = traj(&[(10, 0.0, 0.0)]);
        assert_eq!(trajectory_similarity(&a, &far), Err(SdaError::NoCommonFrames));
    }

    #[test]
    fn similarity_five_frames_hand_summed() {
        // offsets (3,4)=5, (6,8)=10, (0,7)=7, (5,12)=13, (8,15)=17 → mean 52/5
        let a = traj(&[(0, 0.0, 0.0), (1, 1.0, 1.0), (2, 2.0, 0.0), (3, 0.0, 0.0), (4, 1.0, 1.0)]);
        let b = traj(&[(0, 3.0, 4.0), (1, 7.0, 9.0), (2, 2.0, 7.0), (3, 5.0, 12.0), (4, 9.0, 16.0)]);
        assert!((trajectory_similarity(&a, &b).unwrap() - 10.4).abs() < 1e-9);
        // partial overlap only counts shared frames
        assert!((trajectory_similarity(&a[..2], &b[1..]).unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn stability_examples() {
        let a = traj(&[(0, 0.0, 0.0), (1, 0.0, 0.0), (2, 0.0, 0.0)]);
        let steady = traj(&[(0, 20.0, 0.0), (1, 0.0, 20.0), (2, -20.0, 0.0)]);
        assert_eq!(trajectory_stability(&a, &steady).unwrap(), 0.0);
        let wobble = traj(&[(0, 10.0, 0.0), (1, 30.0, 0.0)]);
        assert!((trajectory_stability(&a[..2], &wobble).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(trajectory_stability(&a, &a).unwrap(), 0.0);
        assert_eq!(
            trajectory_stability(&a[..1], &wobble),
            Err(SdaError::TooFewCommonFrames(1))
        );
    }

    #[test]
    fn trajectory_compare_clauses() {
        let cfg = SdaConfig::default();
        let walk = |dy: f64, wobble: f64| -> Vec<TrajPoint> {
            (0..30)
                .map(|f| TrajPoint {
                    frame: f,
                    bp: Point2::new(1.5 * f as f64, dy + if f % 2 == 0 { wobble } else { -wobble }),
                })
                .collect()
        };
        let base = walk(0.0, 0.0);
        // abreast at 20 px
        assert!(trajectory_compare(&base, &walk(20.0, 0.0), &cfg));
        // 50 px apart, separation wobbling ±5: std/mean = 0.1
        let steady_far = walk(50.0, 5.0);
        assert!((trajectory_stability(&base, &steady_far).unwrap() - 0.1).abs() < 1e-9);
        assert!(trajectory_compare(&base, &steady_far, &cfg));
        // similarity 80 px with stability 0.9
        let d = [8.0, 152.0];
        let stranger: Vec<TrajPoint> = (0..30)
            .map(|f| TrajPoint {
                frame: f,
                bp: Point2::new(1.5 * f as f64, d[(f % 2) as usize]),
            })
            .collect();
        assert!((trajectory_similarity(&base, &stranger).unwrap() - 80.0).abs() < 1e-9);
        assert!((trajectory_stability(&base, &stranger).unwrap() - 0.9).abs() < 1e-9);
        assert!(!trajectory_compare(&base, &stranger, &cfg));
        // no shared frames
        assert!(!trajectory_compare(&base, &traj(&[(99, 0.0, 0.0)]), &cfg));
    }

    fn vec2() -> impl Strategy<Value = Vec2> {
        (-50f64..50.0, -50f64..50.0).prop_map(|(x, y)| Vec2::new(x, y))
    }

    proptest! {
        #[test]
        fn distance_ranges_and_symmetry(a in vec2(), b in vec2(), gamma in 0f64..=1.0) {
            if let (Ok(c1), Ok(c2)) = (cosine_distance(a, b), cosine_distance(b, a)) {
                prop_assert!((0.0..=2.0).contains(&c1));
                prop_assert_eq!(c1, c2);
            }
            if let (Ok(m1), Ok(m2)) = (magnitude_distance(a, b), magnitude_distance(b, a)) {
                prop_assert!((0.0..=1.0).contains(&m1));
                prop_assert_eq!(m1, m2);
            }
            let d = velocity_distance(a, b, gamma);
            prop_assert!(d >= 0.0 && d <= 1.0 + gamma + 1e-12);
            prop_assert_eq!(d, velocity_distance(b, a, gamma));
        }

        #[test]
        fn cosine_scale_invariant(a in vec2(), b in vec2(), k in 0.01f64..100.0) {
            if let Ok(c) = cosine_distance(a, b) {
                prop_assert!((cosine_distance(a * k, b).unwrap() - c).abs() < 1e-9);
                prop_assert!((cosine_distance(a, b * k).unwrap() - c).abs() < 1e-9);
            }
        }

        #[test]
        fn trajectory_measures_symmetric(
            pa in prop::collection::vec((-100f64..100.0, -100f64..100.0), 1..20),
            pb in prop::collection::vec((-100f64..100.0, -100f64..100.0), 1..20),
            shift in 0u64..5,
        ) {
            let a: Vec<TrajPoint> = pa.iter().enumerate().map(|(i, &(x, y))| TrajPoint { frame: i as u64, bp: Point2::new(x, y) }).collect();
            let b: Vec<TrajPoint> = pb.iter().enumerate().map(|(i, &(x, y))| TrajPoint { frame: i as u64 + shift, bp: Point2::new(x, y) }).collect();
            prop_assert_eq!(trajectory_similarity(&a, &b), trajectory_similarity(&b, &a));
            prop_assert_eq!(trajectory_stability(&a, &b), trajectory_stability(&b, &a));
        }
    }
}
