use nalgebra::{DMatrix, Matrix3, Vector3};

use super::{FramePrepError, Result};
use crate::geom::Point2;

const DET_EPS: f64 = 1e-12;
const W_EPS: f64 = 1e-12;

/// Projective map from the raw image plane to the calibrated ground plane.
///
/// Always invertible and scaled so that the bottom-right entry is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(FramePrepError::SingularHomography);
        }
        let scale = m[(2, 2)];
        if scale.abs() < DET_EPS {
            return Err(FramePrepError::SingularHomography);
        }
        let m = m / scale;
        if m.determinant().abs() <= DET_EPS {
            return Err(FramePrepError::SingularHomography);
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    pub fn from_row_major(v: &[f64; 9]) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(v))
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 3 + c] = self.m[(r, c)];
            }
        }
        out
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.m.try_inverse().ok_or(FramePrepError::SingularHomography)?;
        Self::new(inv)
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &Homography) -> Result<Self> {
        Self::new(self.m * first.m)
    }

    /// Maps a point, applying the projective division.
    pub fn warp_point(&self, p: Point2) -> Result<Point2> {
        let q = self.m * Vector3::new(p.x, p.y, 1.0);
        if q.z.abs() < W_EPS || !q.z.is_finite() {
            return Err(FramePrepError::PointAtInfinity(p.x, p.y));
        }
        Ok(Point2::new(q.x / q.z, q.y / q.z))
    }
}

/// Translate the centroid to the origin and scale to mean distance √2.
fn normalizing_transform(pts: &[Point2]) -> Matrix3<f64> {
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let mean_dist = pts.iter().map(|p| (p.x - cx).hypot(p.y - cy)).sum::<f64>() / n;
    let s = if mean_dist > 0.0 {
        std::f64::consts::SQRT_2 / mean_dist
    } else {
        1.0
    };
    Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0)
}

fn apply(t: &Matrix3<f64>, p: Point2) -> Point2 {
    Point2::new(t[(0, 0)] * p.x + t[(0, 2)], t[(1, 1)] * p.y + t[(1, 2)])
}

fn collinear(a: Point2, b: Point2, c: Point2) -> bool {
    let (u, v) = (b - a, c - a);
    let scale = u.norm() * v.norm();
    scale == 0.0 || (u.x * v.y - u.y * v.x).abs() / scale < 1e-9
}

/// Least-squares homography from `(image, world)` pairs by the normalized
/// direct linear transform.
///
/// The 2n×9 system is solved by SVD; the right singular vector of the
/// smallest singular value holds the entries of the map.
pub fn estimate_homography(pairs: &[(Point2, Point2)]) -> Result<Homography> {
    let n = pairs.len();
    if n < 4 {
        return Err(FramePrepError::TooFewCorrespondences(n));
    }
    if pairs
        .iter()
        .any(|(a, b)| !(a.x.is_finite() && a.y.is_finite() && b.x.is_finite() && b.y.is_finite()))
    {
        return Err(FramePrepError::DegenerateCorrespondences("non-finite coordinate".into()));
    }
    if n == 4 {
        for side in 0..2 {
            let pts: Vec<Point2> = pairs.iter().map(|&(a, b)| if side == 0 { a } else { b }).collect();
            for (i, j, k) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
                if collinear(pts[i], pts[j], pts[k]) {
                    return Err(FramePrepError::DegenerateCorrespondences(format!(
                        "{} points {i}, {j}, {k} are collinear",
                        if side == 0 { "source" } else { "target" }
                    )));
                }
            }
        }
    }

    let src: Vec<Point2> = pairs.iter().map(|p| p.0).collect();
    let dst: Vec<Point2> = pairs.iter().map(|p| p.1).collect();
    let t_src = normalizing_transform(&src);
    let t_dst = normalizing_transform(&dst);

    // Pad to at least 9 rows so the thin SVD still exposes the null space.
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (s, d)) in src.iter().zip(&dst).enumerate() {
        let s = apply(&t_src, *s);
        let d = apply(&t_dst, *d);
        let r = 2 * i;
        a[(r, 0)] = s.x;
        a[(r, 1)] = s.y;
        a[(r, 2)] = 1.0;
        a[(r, 6)] = -d.x * s.x;
        a[(r, 7)] = -d.x * s.y;
        a[(r, 8)] = -d.x;
        a[(r + 1, 3)] = s.x;
        a[(r + 1, 4)] = s.y;
        a[(r + 1, 5)] = 1.0;
        a[(r + 1, 6)] = -d.y * s.x;
        a[(r + 1, 7)] = -d.y * s.y;
        a[(r + 1, 8)] = -d.y;
    }

    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| FramePrepError::DegenerateCorrespondences("SVD failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let smax = svd.singular_values[order[order.len() - 1]];
    // A one-dimensional null space is required; a second near-zero singular
    // value means the system is rank deficient.
    if smax == 0.0 || svd.singular_values[order[1]] <= 1e-10 * smax {
        return Err(FramePrepError::DegenerateCorrespondences(
            "direct linear transform system is rank deficient".into(),
        ));
    }
    let h = v_t.row(order[0]);
    let h_norm = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let t_dst_inv = t_dst.try_inverse().ok_or(FramePrepError::SingularHomography)?;
    Homography::new(t_dst_inv * h_norm * t_src)
}
