//! Raster-preserving rigid transforms: rotations quantized to the horizontal
//! resolution, axis flips, and random point drops.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::config::AugmentConfig;
use crate::cloud::{Point, PointCloud};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sensor::SensorModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipAxis {
    /// Negates x.
    X,
    /// Negates y.
    Y,
}

/// Rotation by `k·Δφ` about the sensor z-axis, followed by the optional flips.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub k: i64,
    pub flip_x: bool,
    pub flip_y: bool,
}

impl Placement {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Uniform `k` in `[−k_max, k_max]` for `limit`, then a fair coin per flip.
    pub fn random<R: Rng + ?Sized>(sensor: &SensorModel, limit: f64, rng: &mut R) -> Self {
        let k_max = sensor.max_rotation_steps(limit);
        Self {
            k: rng.random_range(-k_max..=k_max),
            flip_x: rng.random_bool(0.5),
            flip_y: rng.random_bool(0.5),
        }
    }

    pub fn apply_point<T: Scalar>(&self, p: &Point<T>, sensor: &SensorModel) -> Point<T> {
        let mut q = if self.k == 0 { *p } else { rotate_point(p, rotation_terms(self.k, sensor)) };
        if self.flip_x {
            q.x = -q.x;
        }
        if self.flip_y {
            q.y = -q.y;
        }
        q
    }

    pub fn apply<T: Scalar>(&self, cloud: &PointCloud<T>, sensor: &SensorModel) -> PointCloud<T> {
        if *self == Self::identity() {
            return cloud.clone();
        }
        let terms = rotation_terms::<T>(self.k, sensor);
        cloud.map_finite(|p| {
            let mut q = if self.k == 0 { *p } else { rotate_point(p, terms) };
            if self.flip_x {
                q.x = -q.x;
            }
            if self.flip_y {
                q.y = -q.y;
            }
            q
        })
    }
}

fn rotation_terms<T: Scalar>(k: i64, sensor: &SensorModel) -> (T, T) {
    let w = sensor.num_columns as i64;
    // Reduce to (−W/2, W/2] so the angle stays within (−π, π].
    let mut k = k.rem_euclid(w);
    if k > w / 2 {
        k -= w;
    }
    let (s, c) = (k as f64 * sensor.delta_phi()).sin_cos();
    (T::from_f64_lossy(c), T::from_f64_lossy(s))
}

#[inline]
fn rotate_point<T: Scalar>(p: &Point<T>, (c, s): (T, T)) -> Point<T> {
    Point {
        x: c * p.x - s * p.y,
        y: s * p.x + c * p.y,
        z: p.z,
        intensity: p.intensity,
    }
}

/// Rotates every point by `k·Δφ` counter-clockwise about the sensor axis.
/// Fails when `|k·Δφ|` exceeds `limit`.
pub fn quantized_rotation<T: Scalar>(
    cloud: &PointCloud<T>,
    k: i64,
    sensor: &SensorModel,
    limit: f64,
) -> Result<PointCloud<T>> {
    let max = sensor.max_rotation_steps(limit);
    if k.abs() > max {
        return Err(Error::RotationOutOfRange { k, max });
    }
    Ok(Placement {
        k,
        ..Placement::identity()
    }
    .apply(cloud, sensor))
}

pub fn flip<T: Scalar>(cloud: &PointCloud<T>, axis: FlipAxis) -> PointCloud<T> {
    cloud.map_finite(|p| match axis {
        FlipAxis::X => Point { x: -p.x, ..*p },
        FlipAxis::Y => Point { y: -p.y, ..*p },
    })
}

/// Independent keep/drop decision per point; `true` keeps.
pub fn drop_mask<R: Rng + ?Sized>(n: usize, rate: f64, rng: &mut R) -> Vec<bool> {
    if rate <= 0.0 {
        return vec![true; n];
    }
    (0..n).map(|_| rng.random::<f64>() >= rate).collect()
}

pub fn point_drop<T: Scalar, R: Rng + ?Sized>(cloud: &PointCloud<T>, rate: f64, rng: &mut R) -> PointCloud<T> {
    cloud.filter(&drop_mask(cloud.len(), rate, rng))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalRecord {
    pub placement: Placement,
    pub dropped: usize,
}

/// Global augmentation with its keep mask over the input points.
pub struct GlobalOutcome<T> {
    pub cloud: PointCloud<T>,
    pub kept: Vec<bool>,
    pub record: Option<GlobalRecord>,
}

/// With probability `p_global`: quantized rotation (uniform admissible `k` under
/// `global_rotation_limit`), independent x/y flips, then point drop. Otherwise identity.
pub fn global_augment<T: Scalar, R: Rng + ?Sized>(
    cloud: &PointCloud<T>,
    config: &AugmentConfig,
    rng: &mut R,
) -> GlobalOutcome<T> {
    if rng.random::<f64>() < config.p_global {
        apply_global(cloud, config, rng)
    } else {
        GlobalOutcome {
            cloud: cloud.clone(),
            kept: vec![true; cloud.len()],
            record: None,
        }
    }
}

/// The global stage without its probability gate.
pub fn apply_global<T: Scalar, R: Rng + ?Sized>(
    cloud: &PointCloud<T>,
    config: &AugmentConfig,
    rng: &mut R,
) -> GlobalOutcome<T> {
    let placement = Placement::random(&config.sensor, config.global_rotation_limit, rng);
    let placed = placement.apply(cloud, &config.sensor);
    let kept = drop_mask(cloud.len(), config.point_drop_rate, rng);
    let out = placed.filter(&kept);
    let dropped = cloud.len() - out.len();
    GlobalOutcome {
        cloud: out,
        kept,
        record: Some(GlobalRecord { placement, dropped }),
    }
}
