//! Rotating lidar beam grid and the spherical range-image mapping.
//!
//! A point at azimuth `φ ∈ (−π, π]` and elevation `θ` lands in
//!
//! ```text
//! col = floor(0.5 · (1 − φ/π) · W)                          clamped to [0, W−1]
//! row = floor((1 − (θ − fov_down)/(fov_up − fov_down)) · H)  clamped to [0, H−1]
//! ```
//!
//! and is out of view when `θ ∉ [fov_down, fov_up]`. Column 0 starts at `φ = π`
//! and columns advance clockwise, so a counter-clockwise rotation by `k·Δφ`
//! moves a point from column `c` to `c − k (mod W)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Beam-grid geometry defining the range-image raster. Angles in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorModel {
    pub num_beams: usize,
    pub num_columns: usize,
    pub fov_up: f64,
    pub fov_down: f64,
}

impl Default for SensorModel {
    /// 64-beam rotating sensor, 2048 columns, +3° to −25° vertical field of view.
    fn default() -> Self {
        Self {
            num_beams: 64,
            num_columns: 2048,
            fov_up: 3.0_f64.to_radians(),
            fov_down: (-25.0_f64).to_radians(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint<T> {
    pub range: T,
    pub azimuth: T,
    pub elevation: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl SensorModel {
    pub fn new(num_beams: usize, num_columns: usize, fov_up: f64, fov_down: f64) -> Result<Self> {
        let sensor = Self {
            num_beams,
            num_columns,
            fov_up,
            fov_down,
        };
        sensor.validate()?;
        Ok(sensor)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_beams < 1 {
            return Err(Error::InvalidSensor("num_beams must be at least 1".into()));
        }
        if self.num_columns < 2 || !self.num_columns.is_multiple_of(2) {
            return Err(Error::InvalidSensor(format!(
                "num_columns must be even and at least 2, got {}",
                self.num_columns
            )));
        }
        if self.num_beams > u16::MAX as usize || self.num_columns > u16::MAX as usize {
            return Err(Error::InvalidSensor("raster dimensions exceed 65535".into()));
        }
        if !(self.fov_up.is_finite() && self.fov_down.is_finite()) || self.fov_up <= self.fov_down {
            return Err(Error::InvalidSensor(format!(
                "fov_up ({}) must exceed fov_down ({})",
                self.fov_up, self.fov_down
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.num_beams
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.num_columns
    }

    #[inline]
    pub fn num_cells(&self) -> usize {
        self.num_beams * self.num_columns
    }

    /// Horizontal resolution `2π / W`.
    #[inline]
    pub fn delta_phi(&self) -> f64 {
        2.0 * PI / self.num_columns as f64
    }

    /// Largest `k` such that `|k · Δφ| ≤ limit`.
    pub fn max_rotation_steps(&self, limit: f64) -> i64 {
        // Relative slack absorbs round-off when the limit is an exact multiple of Δφ.
        let steps = limit / self.delta_phi() * (1.0 + 1e-12);
        (steps.floor() as i64).clamp(0, self.num_columns as i64 / 2)
    }

    #[inline]
    pub fn linear(&self, cell: CellIndex) -> usize {
        cell.row * self.num_columns + cell.col
    }

    #[inline]
    pub fn cell_from_linear(&self, linear: usize) -> CellIndex {
        CellIndex {
            row: linear / self.num_columns,
            col: linear % self.num_columns,
        }
    }

    /// Column of an azimuth; defined for every azimuth, in view or not.
    pub fn column_of(&self, azimuth: f64) -> usize {
        let w = self.num_columns as f64;
        let u = (0.5 * (1.0 - azimuth / PI) * w).floor();
        if u.is_nan() || u < 0.0 {
            0
        } else {
            (u as usize).min(self.num_columns - 1)
        }
    }

    /// Row of an elevation, or `None` outside the vertical field of view.
    pub fn row_of(&self, elevation: f64) -> Option<usize> {
        if !(elevation >= self.fov_down && elevation <= self.fov_up) {
            return None;
        }
        let frac = (elevation - self.fov_down) / (self.fov_up - self.fov_down);
        let v = ((1.0 - frac) * self.num_beams as f64).floor();
        Some(if v <= 0.0 {
            0
        } else {
            (v as usize).min(self.num_beams - 1)
        })
    }

    pub fn project<T: Scalar>(&self, p: &SphericalPoint<T>) -> Option<CellIndex> {
        let row = self.row_of(p.elevation.to_f64_lossless())?;
        let col = self.column_of(p.azimuth.to_f64_lossless());
        Some(CellIndex { row, col })
    }

    /// Cell and range of a Cartesian point; `None` for non-finite, degenerate or out-of-view points.
    #[inline]
    pub fn locate<T: Scalar>(&self, x: T, y: T, z: T) -> Option<(CellIndex, T)> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return None;
        }
        let sp = to_spherical([x, y, z]).ok()?;
        self.project(&sp).map(|cell| (cell, sp.range))
    }

    /// Azimuth and elevation through the center of a cell.
    pub fn cell_center(&self, cell: CellIndex) -> (f64, f64) {
        let u = cell.col as f64 + 0.5;
        let azimuth = PI * (1.0 - 2.0 * u / self.num_columns as f64);
        let frac = 1.0 - (cell.row as f64 + 0.5) / self.num_beams as f64;
        let elevation = self.fov_down + frac * (self.fov_up - self.fov_down);
        (azimuth, elevation)
    }
}

/// Spherical coordinates of a Cartesian point. Azimuth is normalized to `(−π, π]`.
pub fn to_spherical<T: Scalar>(p: [T; 3]) -> Result<SphericalPoint<T>> {
    let [x, y, z] = p;
    let range = (x * x + y * y + z * z).sqrt();
    if !(range > T::zero()) {
        return Err(Error::DegeneratePoint);
    }
    let mut azimuth = y.atan2(x);
    if azimuth <= -T::PI() {
        azimuth = T::PI();
    }
    let ratio = (z / range).max(-T::one()).min(T::one());
    Ok(SphericalPoint {
        range,
        azimuth,
        elevation: ratio.asin(),
    })
}
