//! Odometry poses and reversal of the dataset's in-sweep ego-motion compensation.

use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sensor::SensorModel;

/// Rigid transform `p ↦ R·p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(t: [f64; 3]) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::from(t),
        }
    }

    /// Builds a pose from a row-major 3×4 matrix `[R | t]`, projecting `R` onto
    /// the nearest rotation. Fails if `R` is far from orthonormal.
    pub fn from_row_major(m: &[f64; 12]) -> Result<Self, String> {
        let raw = Matrix3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
        let deviation = (raw.transpose() * raw - Matrix3::identity()).abs().max();
        if !deviation.is_finite() || deviation > 1e-3 {
            return Err(format!("rotation block is not orthonormal (deviation {deviation:.3e})"));
        }
        let rotation = Rotation3::from_matrix_eps(&raw, 1e-12, 100, Rotation3::identity()).into_inner();
        Ok(Self {
            rotation,
            translation: Vector3::new(m[3], m[7], m[11]),
        })
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Pose) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn transform(&self, p: [f64; 3]) -> [f64; 3] {
        let v = self.rotation * Vector3::from(p) + self.translation;
        [v.x, v.y, v.z]
    }

    pub fn is_identity(&self) -> bool {
        self.rotation == Matrix3::identity() && self.translation == Vector3::zeros()
    }

    /// Fraction `s` of this motion: translation scaled linearly, rotation by slerp from identity.
    pub fn interpolate(&self, s: f64) -> Self {
        let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(self.rotation));
        let qs = UnitQuaternion::identity().slerp(&q, s);
        Self {
            rotation: qs.to_rotation_matrix().into_inner(),
            translation: self.translation * s,
        }
    }
}

fn parse_numbers<const N: usize>(text: &str) -> Result<[f64; N], String> {
    let values: Vec<f64> = text
        .split_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|e| format!("bad number {tok:?}: {e}")))
        .collect::<Result<_, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} values, found {}", v.len()))
}

/// Parses `poses.txt`: one row-major 3×4 matrix per line. Blank lines are ignored.
pub fn parse_poses(path: &Path, text: &str) -> Result<Vec<Pose>> {
    let mut poses = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pose = parse_numbers::<12>(line)
            .and_then(|m| Pose::from_row_major(&m))
            .map_err(|message| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            })?;
        poses.push(pose);
    }
    Ok(poses)
}

pub fn read_poses(path: impl AsRef<Path>) -> Result<Vec<Pose>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_poses(path, &text)
}

/// Velodyne-to-camera transform from the `Tr:` line of `calib.txt`, if present.
pub fn parse_calibration(path: &Path, text: &str) -> Result<Option<Pose>> {
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.trim_start().strip_prefix("Tr:") {
            let pose = parse_numbers::<12>(rest)
                .and_then(|m| Pose::from_row_major(&m))
                .map_err(|message| Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message,
                })?;
            return Ok(Some(pose));
        }
    }
    Ok(None)
}

pub fn read_calibration(path: impl AsRef<Path>) -> Result<Option<Pose>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_calibration(path, &text)
}

/// Converts camera-frame poses to the lidar frame: `Tr⁻¹ · P · Tr`.
pub fn poses_in_lidar_frame(poses: &[Pose], velo_to_cam: &Pose) -> Vec<Pose> {
    let inv = velo_to_cam.inverse();
    poses.iter().map(|p| inv.compose(p).compose(velo_to_cam)).collect()
}

/// Sweep-time proxy of a point: `col / W`, with column 0 at azimuth π.
pub fn sweep_fraction<T: Scalar>(x: T, y: T, sensor: &SensorModel) -> f64 {
    let azimuth = y.to_f64_lossless().atan2(x.to_f64_lossless());
    sensor.column_of(azimuth) as f64 / sensor.num_columns as f64
}

/// Removes the fraction `s` of the relative motion `delta` from a point.
pub fn undo_motion_at(p: [f64; 3], delta: &Pose, s: f64) -> [f64; 3] {
    delta.interpolate(s).inverse().transform(p)
}

/// Reverses per-point ego-motion compensation. `Δ = pose_prev⁻¹ · pose_curr` is
/// applied fractionally per point (linear translation, slerp rotation) and inverted.
/// Point count, order, intensities and labels are preserved; non-finite points are untouched.
pub fn undo_ego_motion<T: Scalar>(
    cloud: &PointCloud<T>,
    pose_prev: &Pose,
    pose_curr: &Pose,
    sensor: &SensorModel,
) -> PointCloud<T> {
    let delta = pose_prev.inverse().compose(pose_curr);
    if delta.is_identity() {
        return cloud.clone();
    }
    cloud.map_finite(|p| {
        let s = sweep_fraction(p.x, p.y, sensor);
        let [x, y, z] = undo_motion_at(
            [p.x.to_f64_lossless(), p.y.to_f64_lossless(), p.z.to_f64_lossless()],
            &delta,
            s,
        );
        crate::cloud::Point::new(T::from_f64_lossy(x), T::from_f64_lossy(y), T::from_f64_lossy(z), p.intensity)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EgoMotionStatus {
    Applied,
    /// No pose for this frame or its predecessor; the cloud is returned unchanged.
    SkippedMissingPoses,
}

/// Applies [`undo_ego_motion`] to frame `frame` of a sequence with `poses`.
pub fn compensate_frame<T: Scalar>(
    cloud: &PointCloud<T>,
    poses: Option<&[Pose]>,
    frame: usize,
    sensor: &SensorModel,
) -> (PointCloud<T>, EgoMotionStatus) {
    match poses {
        Some(poses) if frame >= 1 && frame < poses.len() => (
            undo_ego_motion(cloud, &poses[frame - 1], &poses[frame], sensor),
            EgoMotionStatus::Applied,
        ),
        _ => (cloud.clone(), EgoMotionStatus::SkippedMissingPoses),
    }
}
