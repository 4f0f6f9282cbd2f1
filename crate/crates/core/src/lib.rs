//! Pedestrian tracking and social-distancing analysis on calibrated
//! (bird's-eye) video.

pub mod analysis;
pub mod frame_prep;
pub mod geom;
pub mod mot_csv;
pub mod mot_eval;
pub mod sda;
pub mod stats;
pub mod synth;
pub mod tracker;
