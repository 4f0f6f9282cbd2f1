use super::{Frame, Homography, Result};
use crate::geom::{BBox, Point2};

/// Resampling kernel for [`warp_frame`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Bilinear,
    Nearest,
}

// Sub-ulp drift from the inverse map must not push exact integer
// coordinates out of the source.
const SNAP: f64 = 1e-9;

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < SNAP {
        r
    } else {
        v
    }
}

/// Resamples `frame` onto an `out_w`×`out_h` grid through `h`, using inverse
/// mapping. Pixel `(x, y)` sits at integer coordinates; output pixels whose
/// source falls outside the input are 0.
pub fn warp_frame(
    h: &Homography,
    frame: &Frame,
    out_w: u32,
    out_h: u32,
    interp: Interpolation,
) -> Result<Frame> {
    let inv = h.inverse()?;
    let ch = frame.channels();
    let (w, hgt) = (frame.width() as f64, frame.height() as f64);
    let mut pixels = vec![0u8; out_w as usize * out_h as usize * ch as usize];
    for y in 0..out_h {
        for x in 0..out_w {
            let Ok(src) = inv.warp_point(Point2::new(x as f64, y as f64)) else {
                continue;
            };
            let (sx, sy) = (snap(src.x), snap(src.y));
            let base = (y as usize * out_w as usize + x as usize) * ch as usize;
            match interp {
                Interpolation::Nearest => {
                    let (nx, ny) = (sx.round_ties_even(), sy.round_ties_even());
                    if nx < 0.0 || ny < 0.0 || nx > w - 1.0 || ny > hgt - 1.0 {
                        continue;
                    }
                    for c in 0..ch {
                        pixels[base + c as usize] = frame.get(nx as u32, ny as u32, c);
                    }
                }
                Interpolation::Bilinear => {
                    if sx < 0.0 || sy < 0.0 || sx > w - 1.0 || sy > hgt - 1.0 {
                        continue;
                    }
                    let x0 = (sx.floor() as u32).min(frame.width().saturating_sub(2));
                    let y0 = (sy.floor() as u32).min(frame.height().saturating_sub(2));
                    let x1 = (x0 + 1).min(frame.width() - 1);
                    let y1 = (y0 + 1).min(frame.height() - 1);
                    let fx = sx - x0 as f64;
                    let fy = sy - y0 as f64;
                    for c in 0..ch {
                        let p00 = f64::from(frame.get(x0, y0, c));
                        let p10 = f64::from(frame.get(x1, y0, c));
                        let p01 = f64::from(frame.get(x0, y1, c));
                        let p11 = f64::from(frame.get(x1, y1, c));
                        let top = p00 + (p10 - p00) * fx;
                        let bottom = p01 + (p11 - p01) * fx;
                        let v = top + (bottom - top) * fy;
                        pixels[base + c as usize] = v.clamp(0.0, 255.0).round_ties_even() as u8;
                    }
                }
            }
        }
    }
    Frame::new(out_w, out_h, ch, pixels, frame.index)
}

/// Axis-aligned bounds of a box's four warped corners.
pub fn warp_bbox(h: &Homography, b: &BBox) -> Result<BBox> {
    let corners = [
        Point2::new(b.x, b.y),
        Point2::new(b.right(), b.y),
        Point2::new(b.right(), b.bottom()),
        Point2::new(b.x, b.bottom()),
    ];
    let mut mapped = Vec::with_capacity(4);
    for c in corners {
        mapped.push(h.warp_point(c)?);
    }
    Ok(BBox::enclosing(mapped).expect("four corners"))
}
