//! Constant-velocity Kalman filter over `(u, v, s, r, u̇, v̇, ṡ)`: box center,
//! area, aspect ratio (held constant) and their rates.

use nalgebra::{SMatrix, SVector};

use super::{Detection, TrackerConfig};
use crate::geom::BBox;

pub type StateVec = SVector<f64, 7>;
pub type StateCov = SMatrix<f64, 7, 7>;
pub type Measurement = SVector<f64, 4>;
type MeasCov = SMatrix<f64, 4, 4>;
type ObsMatrix = SMatrix<f64, 4, 7>;

const MIN_SCALE: f64 = 1e-6;
const INNOVATION_REG: f64 = 1e-9;

/// Transition, observation and noise matrices derived from a
/// [`TrackerConfig`].
#[derive(Debug, Clone)]
pub struct MotionModel {
    f: StateCov,
    h: ObsMatrix,
    q: StateCov,
    r: MeasCov,
    p0: StateCov,
}

impl MotionModel {
    pub fn new(cfg: &TrackerConfig) -> Self {
        let mut f = StateCov::identity();
        f[(0, 4)] = 1.0;
        f[(1, 5)] = 1.0;
        f[(2, 6)] = 1.0;
        let mut h = ObsMatrix::zeros();
        for i in 0..4 {
            h[(i, i)] = 1.0;
        }
        let q = StateCov::from_diagonal(&StateVec::from_column_slice(&[
            1.0, 1.0, 1.0, 1.0, 1e-2, 1e-2, 1e-4,
        ])) * cfg.process_noise_scale;
        let r = MeasCov::from_diagonal(&Measurement::new(1.0, 1.0, 10.0, 10.0)) * cfg.measurement_noise_scale;
        // velocities start unknown: ×1000 on their variance, then ×10 overall
        let p0 = StateCov::from_diagonal(&StateVec::from_column_slice(&[
            10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4,
        ]));
        Self { f, h, q, r, p0 }
    }

    pub fn transition(&self) -> &StateCov {
        &self.f
    }
}

/// `(u, v, s, r)` of a box.
pub fn bbox_to_measurement(b: &BBox) -> Measurement {
    let c = b.center();
    Measurement::new(c.x, c.y, b.w * b.h, b.w / b.h)
}

pub fn state_to_bbox(x: &StateVec) -> BBox {
    let s = x[2].max(MIN_SCALE);
    let r = x[3].max(MIN_SCALE);
    let w = (s * r).sqrt();
    let h = s / w;
    BBox::new(x[0] - w / 2.0, x[1] - h / 2.0, w, h)
}

/// One tracked object.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanTrack {
    pub state: StateVec,
    pub covariance: StateCov,
    pub id: u64,
    /// Detections absorbed, including the one that created the track.
    pub hits: u32,
    /// Frames since creation.
    pub age: u32,
    pub time_since_update: u32,
    pub class_id: i64,
    pub conf: f64,
}

impl KalmanTrack {
    pub fn new(id: u64, det: &Detection, model: &MotionModel) -> Self {
        let z = bbox_to_measurement(&det.bbox);
        let mut state = StateVec::zeros();
        state.fixed_rows_mut::<4>(0).copy_from(&z);
        Self {
            state,
            covariance: model.p0,
            id,
            hits: 1,
            age: 0,
            time_since_update: 0,
            class_id: det.class_id,
            conf: det.conf,
        }
    }

    pub fn bbox(&self) -> BBox {
        state_to_bbox(&self.state)
    }

    /// Advances one frame.
    pub fn predict(&mut self, model: &MotionModel) {
        self.state = model.f * self.state;
        if self.state[2] <= 0.0 {
            self.state[2] = MIN_SCALE;
            self.state[6] = 0.0;
        }
        self.covariance = model.f * self.covariance * model.f.transpose() + model.q;
        symmetrize(&mut self.covariance);
        self.age += 1;
        self.time_since_update += 1;
    }

    /// Absorbs a detection with the Joseph-form covariance update.
    pub fn update(&mut self, det: &Detection, model: &MotionModel) {
        let z = bbox_to_measurement(&det.bbox);
        let (h, p) = (&model.h, &self.covariance);
        let innovation = z - h * self.state;
        let s = h * p * h.transpose() + model.r;
        let s_inv = s
            .try_inverse()
            .or_else(|| (s + MeasCov::identity() * INNOVATION_REG).try_inverse())
            .unwrap_or_else(MeasCov::zeros);
        let k = p * h.transpose() * s_inv;
        self.state += k * innovation;
        if self.state[2] <= 0.0 {
            self.state[2] = MIN_SCALE;
        }
        if self.state[3] <= 0.0 {
            self.state[3] = MIN_SCALE;
        }
        let i_kh = StateCov::identity() - k * h;
        self.covariance = i_kh * p * i_kh.transpose() + k * model.r * k.transpose();
        symmetrize(&mut self.covariance);
        self.hits += 1;
        self.time_since_update = 0;
        self.class_id = det.class_id;
        self.conf = det.conf;
    }
}

fn symmetrize(p: &mut StateCov) {
    *p = (*p + p.transpose()) * 0.5;
}
