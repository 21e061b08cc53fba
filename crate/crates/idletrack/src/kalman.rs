//! Constant-velocity Kalman filter over bounding boxes.
//!
//! State is `(cx, cy, aspect, height)` plus per-frame velocities; the
//! measurement is the same positional block taken from a detection box.
//! Noise scales with box height so behavior is size-invariant.

use nalgebra::{SMatrix, SVector};

use crate::bbox::BBox;
use crate::error::{Error, Result};

type Vec8 = SVector<f64, 8>;
type Mat8 = SMatrix<f64, 8, 8>;
type Vec4 = SVector<f64, 4>;
type Mat4 = SMatrix<f64, 4, 4>;
type Mat4x8 = SMatrix<f64, 4, 8>;

const STD_WEIGHT_POSITION: f64 = 1.0 / 20.0;
const STD_WEIGHT_VELOCITY: f64 = 1.0 / 160.0;

/// Minimum aspect/height when converting a coasted state back to a box.
const MIN_EXTENT: f64 = 1e-6;

/// Filter state: mean `(cx, cy, a, h, vcx, vcy, va, vh)` and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: Vec8,
    pub covariance: Mat8,
}

impl KalmanState {
    /// Current estimate as a box. Aspect and height are floored at a tiny
    /// positive value so a long-coasted shrinking state still yields a
    /// valid box for IoU.
    pub fn bbox(&self) -> BBox {
        let a = self.mean[2].max(MIN_EXTENT);
        let h = self.mean[3].max(MIN_EXTENT);
        let w = a * h;
        BBox {
            x: self.mean[0] - w / 2.0,
            y: self.mean[1] - h / 2.0,
            w,
            h,
        }
    }
}

/// Shared motion/measurement matrices for all tracks.
#[derive(Debug, Clone)]
pub struct BoxMotionModel {
    transition: Mat8,
    observation: Mat4x8,
}

impl Default for BoxMotionModel {
    fn default() -> Self {
        let mut transition = Mat8::identity();
        for i in 0..4 {
            transition[(i, i + 4)] = 1.0;
        }
        let mut observation = Mat4x8::zeros();
        for i in 0..4 {
            observation[(i, i)] = 1.0;
        }
        BoxMotionModel { transition, observation }
    }
}

fn measurement_of(b: &BBox) -> Vec4 {
    let (cx, cy) = b.centroid();
    Vec4::new(cx, cy, b.aspect(), b.h)
}

impl BoxMotionModel {
    /// New state centered on a detection: positional block from the box,
    /// zero velocities, diagonal covariance scaled by box height.
    pub fn init(&self, b: &BBox) -> KalmanState {
        let z = measurement_of(b);
        let mut mean = Vec8::zeros();
        for i in 0..4 {
            mean[i] = z[i];
        }
        let h = b.h;
        let std = [
            2.0 * STD_WEIGHT_POSITION * h,
            2.0 * STD_WEIGHT_POSITION * h,
            1e-2,
            2.0 * STD_WEIGHT_POSITION * h,
            10.0 * STD_WEIGHT_VELOCITY * h,
            10.0 * STD_WEIGHT_VELOCITY * h,
            1e-5,
            10.0 * STD_WEIGHT_VELOCITY * h,
        ];
        let mut covariance = Mat8::zeros();
        for (i, s) in std.iter().enumerate() {
            covariance[(i, i)] = s * s;
        }
        KalmanState { mean, covariance }
    }

    /// One constant-velocity step; covariance grows by process noise.
    pub fn predict(&self, s: &KalmanState) -> KalmanState {
        let h = s.mean[3];
        let std = [
            STD_WEIGHT_POSITION * h,
            STD_WEIGHT_POSITION * h,
            1e-2,
            STD_WEIGHT_POSITION * h,
            STD_WEIGHT_VELOCITY * h,
            STD_WEIGHT_VELOCITY * h,
            1e-5,
            STD_WEIGHT_VELOCITY * h,
        ];
        let mut process_noise = Mat8::zeros();
        for (i, v) in std.iter().enumerate() {
            process_noise[(i, i)] = v * v;
        }
        let mean = self.transition * s.mean;
        let covariance =
            self.transition * s.covariance * self.transition.transpose() + process_noise;
        KalmanState { mean, covariance }
    }

    /// Standard measurement update with a detection box.
    pub fn update(&self, s: &KalmanState, b: &BBox) -> Result<KalmanState> {
        let z = measurement_of(b);
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteMeasurement(format!("{b:?}")));
        }

        let h = s.mean[3];
        let std = [
            STD_WEIGHT_POSITION * h,
            STD_WEIGHT_POSITION * h,
            1e-1,
            STD_WEIGHT_POSITION * h,
        ];
        let mut measurement_noise = Mat4::zeros();
        for (i, v) in std.iter().enumerate() {
            measurement_noise[(i, i)] = v * v;
        }

        let projected_mean = self.observation * s.mean;
        let innovation_cov =
            self.observation * s.covariance * self.observation.transpose() + measurement_noise;
        let inv = innovation_cov.try_inverse().ok_or_else(|| {
            Error::Internal("innovation covariance not invertible".to_string())
        })?;
        let gain = s.covariance * self.observation.transpose() * inv;

        let mean = s.mean + gain * (z - projected_mean);
        let covariance = s.covariance - gain * innovation_cov * gain.transpose();
        // keep the matrix symmetric against accumulated rounding
        let covariance = (covariance + covariance.transpose()) * 0.5;

        Ok(KalmanState { mean, covariance })
    }
}
