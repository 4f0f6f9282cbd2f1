//! Pixel-level preprocessing ahead of detection: weighted-mask background
//! subtraction against the sequence mean, ground-plane calibration by
//! homography, and center cropping.
//!
//! Every operation here is a pure function of its inputs. The stages are
//! applied in the order subtract → warp → crop.

mod homography;
mod pnm;
mod warp;

pub use homography::{estimate_homography, Homography};
pub use pnm::{decode_pnm, encode_pnm, read_pnm, write_pnm};
pub use warp::{warp_bbox, warp_frame, Interpolation};

use thiserror::Error;

/// Default weight on the subtracted background mean.
pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Error)]
pub enum FramePrepError {
    #[error("no frames supplied")]
    EmptySequence,
    #[error("dimension mismatch: expected {expected:?}, got {got:?} (width, height, channels)")]
    DimensionMismatch {
        expected: (u32, u32, u8),
        got: (u32, u32, u8),
    },
    #[error("alpha {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("need at least 4 correspondences, got {0}")]
    TooFewCorrespondences(usize),
    #[error("degenerate correspondence configuration: {0}")]
    DegenerateCorrespondences(String),
    #[error("homography is not invertible or not normalizable")]
    SingularHomography,
    #[error("point ({0}, {1}) maps to the line at infinity")]
    PointAtInfinity(f64, f64),
    #[error("crop rectangle {rect:?} exceeds frame {width}x{height}")]
    CropOutOfBounds { rect: CropRect, width: u32, height: u32 },
    #[error("malformed PNM data: {0}")]
    Pnm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FramePrepError>;

/// An 8-bit image, row-major, interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
    pub index: u64,
}

impl Frame {
    pub fn new(width: u32, height: u32, channels: u8, pixels: Vec<u8>, index: u64) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(FramePrepError::InvalidFrame(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(FramePrepError::InvalidFrame(format!(
                "buffer holds {} samples, {width}x{height}x{channels} needs {expected}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
            index,
        })
    }

    /// A frame with every sample set to `value`.
    pub fn filled(width: u32, height: u32, channels: u8, value: u8, index: u64) -> Result<Self> {
        let n = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, vec![value; n], index)
    }

    /// Builds a frame by evaluating `f(x, y, channel)` for every sample.
    pub fn from_fn(
        width: u32,
        height: u32,
        channels: u8,
        index: u64,
        mut f: impl FnMut(u32, u32, u8) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize * channels as usize);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    pixels.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, pixels, index)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn dims(&self) -> (u32, u32, u8) {
        (self.width, self.height, self.channels)
    }

    pub fn get(&self, x: u32, y: u32, c: u8) -> u8 {
        self.pixels[self.offset(x, y, c)]
    }

    fn offset(&self, x: u32, y: u32, c: u8) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize + c as usize
    }
}

/// Per-sample mean over a run of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFrame {
    width: u32,
    height: u32,
    channels: u8,
    samples: Vec<f64>,
    n: usize,
}

impl MeanFrame {
    pub fn dims(&self) -> (u32, u32, u8) {
        (self.width, self.height, self.channels)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Number of frames averaged.
    pub fn count(&self) -> usize {
        self.n
    }
}

/// Streaming accumulator for [`MeanFrame`]. Single writer.
#[derive(Debug, Default)]
pub struct MeanAccumulator {
    dims: Option<(u32, u32, u8)>,
    sums: Vec<f64>,
    n: usize,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, frame: &Frame) -> Result<()> {
        match self.dims {
            None => {
                self.dims = Some(frame.dims());
                self.sums = vec![0.0; frame.pixels.len()];
            }
            Some(d) if d != frame.dims() => {
                return Err(FramePrepError::DimensionMismatch {
                    expected: d,
                    got: frame.dims(),
                })
            }
            Some(_) => {}
        }
        for (s, &p) in self.sums.iter_mut().zip(&frame.pixels) {
            *s += f64::from(p);
        }
        self.n += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<MeanFrame> {
        let (width, height, channels) = self.dims.ok_or(FramePrepError::EmptySequence)?;
        let n = self.n as f64;
        Ok(MeanFrame {
            width,
            height,
            channels,
            samples: self.sums.into_iter().map(|s| s / n).collect(),
            n: self.n,
        })
    }
}

/// Mean background over every frame of the sequence.
pub fn compute_mean_frame(frames: &[Frame]) -> Result<MeanFrame> {
    let mut acc = MeanAccumulator::new();
    for f in frames {
        acc.push(f)?;
    }
    acc.finish()
}

/// Mean over the window of `window` frames centred on position `at`,
/// truncated at the sequence ends. A `window` of 0 averages the whole
/// sequence.
pub fn compute_windowed_mean(frames: &[Frame], at: usize, window: usize) -> Result<MeanFrame> {
    if frames.is_empty() {
        return Err(FramePrepError::EmptySequence);
    }
    if window == 0 {
        return compute_mean_frame(frames);
    }
    let half = window / 2;
    let lo = at.saturating_sub(half);
    let hi = (lo + window).min(frames.len());
    let lo = hi.saturating_sub(window);
    compute_mean_frame(&frames[lo..hi])
}

/// Weighted-mask background subtraction: `clamp(frame − alpha·mean, 0, 255)`
/// rounded half-to-even.
pub fn wmbs_apply(frame: &Frame, mean: &MeanFrame, alpha: f64) -> Result<Frame> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(FramePrepError::AlphaOutOfRange(alpha));
    }
    if frame.dims() != mean.dims() {
        return Err(FramePrepError::DimensionMismatch {
            expected: mean.dims(),
            got: frame.dims(),
        });
    }
    let pixels = frame
        .pixels
        .iter()
        .zip(&mean.samples)
        .map(|(&p, &m)| (f64::from(p) - alpha * m).clamp(0.0, 255.0).round_ties_even() as u8)
        .collect();
    Frame::new(frame.width, frame.height, frame.channels, pixels, frame.index)
}

/// Axis-aligned crop window in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl CropRect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    /// The whole frame.
    pub fn full(width: u32, height: u32) -> Self {
        Self::new(0, 0, width, height)
    }

    /// A `w`×`h` window centred in a `width`×`height` frame.
    pub fn centered(width: u32, height: u32, w: u32, h: u32) -> Self {
        Self::new(width.saturating_sub(w) / 2, height.saturating_sub(h) / 2, w, h)
    }

    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.w > 0
            && self.h > 0
            && u64::from(self.x) + u64::from(self.w) <= u64::from(width)
            && u64::from(self.y) + u64::from(self.h) <= u64::from(height)
    }
}

pub fn center_crop(frame: &Frame, rect: CropRect) -> Result<Frame> {
    if !rect.fits(frame.width, frame.height) {
        return Err(FramePrepError::CropOutOfBounds {
            rect,
            width: frame.width,
            height: frame.height,
        });
    }
    let c = frame.channels as usize;
    let row_len = rect.w as usize * c;
    let mut pixels = Vec::with_capacity(row_len * rect.h as usize);
    for y in rect.y..rect.y + rect.h {
        let start = frame.offset(rect.x, y, 0);
        pixels.extend_from_slice(&frame.pixels[start..start + row_len]);
    }
    Frame::new(rect.w, rect.h, frame.channels, pixels, frame.index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(rng: &mut ChaCha8Rng, w: u32, h: u32, c: u8, index: u64) -> Frame {
        let n = (w * h) as usize * c as usize;
        Frame::new(w, h, c, (0..n).map(|_| rng.random()).collect(), index).unwrap()
    }

    #[test]
    fn frame_rejects_bad_buffer() {
        assert!(Frame::new(2, 2, 1, vec![0; 3], 0).is_err());
        assert!(Frame::new(2, 2, 2, vec![0; 8], 0).is_err());
    }

    #[test]
    fn mean_of_identical_frames_is_the_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_frame(&mut rng, 7, 5, 3, 0);
        let mean = compute_mean_frame(&[f.clone(), f.clone()]).unwrap();
        for (&m, &p) in mean.samples().iter().zip(f.pixels()) {
            assert_eq!(m, f64::from(p));
        }
        assert_eq!(mean.count(), 2);
    }

    #[test]
    fn mean_of_black_and_white_is_midgrey() {
        let a = Frame::filled(4, 3, 1, 0, 0).unwrap();
        let b = Frame::filled(4, 3, 1, 255, 1).unwrap();
        let mean = compute_mean_frame(&[a, b]).unwrap();
        assert!(mean.samples().iter().all(|&m| m == 127.5));
    }

    #[test]
    fn mean_matches_brute_force_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let frames: Vec<Frame> = (0..10).map(|i| random_frame(&mut rng, 9, 6, 1, i)).collect();
        let mean = compute_mean_frame(&frames).unwrap();
        for i in 0..frames[0].pixels().len() {
            let mut total = 0u32;
            for f in &frames {
                total += u32::from(f.pixels()[i]);
            }
            assert!((mean.samples()[i] - f64::from(total) / 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_errors() {
        assert!(matches!(compute_mean_frame(&[]), Err(FramePrepError::EmptySequence)));
        let a = Frame::filled(4, 3, 1, 0, 0).unwrap();
        let b = Frame::filled(3, 4, 1, 0, 1).unwrap();
        assert!(matches!(
            compute_mean_frame(&[a, b]),
            Err(FramePrepError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn windowed_mean_truncates_at_ends() {
        let frames: Vec<Frame> = (0..6).map(|i| Frame::filled(1, 1, 1, i as u8 * 10, i).unwrap()).collect();
        // window 3 at position 0 covers frames 0..3
        assert_eq!(compute_windowed_mean(&frames, 0, 3).unwrap().samples()[0], 10.0);
        assert_eq!(compute_windowed_mean(&frames, 3, 3).unwrap().samples()[0], 30.0);
        assert_eq!(compute_windowed_mean(&frames, 5, 3).unwrap().samples()[0], 40.0);
        assert_eq!(compute_windowed_mean(&frames, 5, 0).unwrap().samples()[0], 25.0);
    }

    #[test]
    fn wmbs_alpha_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frames: Vec<Frame> = (0..4).map(|i| random_frame(&mut rng, 5, 5, 3, i)).collect();
        let mean = compute_mean_frame(&frames).unwrap();
        for f in &frames {
            assert_eq!(&wmbs_apply(f, &mean, 0.0).unwrap(), f);
        }
    }

    #[test]
    fn wmbs_constant_video_full_alpha_is_black() {
        let frames: Vec<Frame> = (0..5).map(|i| Frame::filled(6, 4, 1, 173, i).unwrap()).collect();
        let mean = compute_mean_frame(&frames).unwrap();
        for f in &frames {
            assert!(wmbs_apply(f, &mean, 1.0).unwrap().pixels().iter().all(|&p| p == 0));
        }
    }

    #[test]
    fn wmbs_direct_evaluation() {
        let f = Frame::filled(1, 1, 1, 200, 0).unwrap();
        let bg = compute_mean_frame(&[Frame::filled(1, 1, 1, 100, 0).unwrap()]).unwrap();
        assert_eq!(wmbs_apply(&f, &bg, 0.5).unwrap().pixels(), &[150]);
    }

    #[test]
    fn wmbs_rounds_half_to_even() {
        let bg = compute_mean_frame(&[
            Frame::filled(1, 1, 1, 0, 0).unwrap(),
            Frame::filled(1, 1, 1, 1, 1).unwrap(),
        ])
        .unwrap();
        // 10 - 0.5 = 9.5 → 10; 11 - 0.5 = 10.5 → 10
        assert_eq!(wmbs_apply(&Frame::filled(1, 1, 1, 10, 0).unwrap(), &bg, 1.0).unwrap().pixels(), &[10]);
        assert_eq!(wmbs_apply(&Frame::filled(1, 1, 1, 11, 0).unwrap(), &bg, 1.0).unwrap().pixels(), &[10]);
    }

    #[test]
    fn wmbs_errors() {
        let f = Frame::filled(2, 2, 1, 1, 0).unwrap();
        let mean = compute_mean_frame(std::slice::from_ref(&f)).unwrap();
        assert!(matches!(wmbs_apply(&f, &mean, 1.5), Err(FramePrepError::AlphaOutOfRange(_))));
        assert!(matches!(wmbs_apply(&f, &mean, -0.1), Err(FramePrepError::AlphaOutOfRange(_))));
        let g = Frame::filled(2, 2, 3, 1, 0).unwrap();
        assert!(matches!(
            wmbs_apply(&g, &mean, 0.5),
            Err(FramePrepError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn wmbs_monotone_in_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let frames: Vec<Frame> = (0..3).map(|i| random_frame(&mut rng, 8, 8, 1, i)).collect();
        let mean = compute_mean_frame(&frames).unwrap();
        let mut prev = wmbs_apply(&frames[0], &mean, 0.0).unwrap();
        for k in 1..=20 {
            let next = wmbs_apply(&frames[0], &mean, k as f64 / 20.0).unwrap();
            assert!(next.pixels().iter().zip(prev.pixels()).all(|(a, b)| a <= b));
            prev = next;
        }
    }

    #[test]
    fn crop_full_frame_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_frame(&mut rng, 12, 9, 3, 4);
        assert_eq!(center_crop(&f, CropRect::full(12, 9)).unwrap(), f);
    }

    #[test]
    fn crop_single_pixel() {
        let f = Frame::from_fn(10, 10, 1, 0, |x, y, _| (x * 10 + y) as u8).unwrap();
        let c = center_crop(&f, CropRect::new(5, 5, 1, 1)).unwrap();
        assert_eq!(c.pixels(), &[f.get(5, 5, 0)]);
    }

    #[test]
    fn crop_gradient_matches_offset() {
        let f = Frame::from_fn(160, 140, 3, 2, |x, y, c| ((x + 2 * y + 50 * c as u32) % 256) as u8).unwrap();
        let r = CropRect::centered(160, 140, 100, 100);
        assert_eq!(r, CropRect::new(30, 20, 100, 100));
        let c = center_crop(&f, r).unwrap();
        for y in 0..100 {
            for x in 0..100 {
                for ch in 0..3 {
                    assert_eq!(c.get(x, y, ch), f.get(x + 30, y + 20, ch));
                }
            }
        }
    }

    #[test]
    fn crop_out_of_bounds() {
        let f = Frame::filled(10, 10, 1, 0, 0).unwrap();
        assert!(matches!(
            center_crop(&f, CropRect::new(5, 5, 6, 1)),
            Err(FramePrepError::CropOutOfBounds { .. })
        ));
        assert!(center_crop(&f, CropRect::new(0, 0, 0, 1)).is_err());
    }
}
