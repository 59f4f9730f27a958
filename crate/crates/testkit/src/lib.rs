//! Test support: brute-force competition oracles and random cloud generators.
//!
//! The oracles evaluate the per-cell rules directly, pairing every point of one
//! cloud with every point of the other that lands in the same cell. They share
//! only the cell/range primitive (`SensorModel::locate`) with the library.

use std::collections::HashMap;

use lidar_forge::{LabelRecord, Point, PointCloud, Scalar, SensorModel};
use rand::Rng;

type Cells<T> = HashMap<(usize, usize), Vec<(usize, T)>>;

fn group<T: Scalar>(points: &[Point<T>], sensor: &SensorModel) -> (Cells<T>, Vec<usize>) {
    let mut cells: Cells<T> = HashMap::new();
    let mut off = Vec::new();
    for (i, p) in points.iter().enumerate() {
        match sensor.locate(p.x, p.y, p.z) {
            Some((c, r)) => cells.entry((c.row, c.col)).or_default().push((i, r)),
            None => off.push(i),
        }
    }
    (cells, off)
}

/// Keep masks `(target, object)` for injecting `object` into `target`.
pub fn injection_oracle<T: Scalar>(
    target: &[Point<T>],
    object: &[Point<T>],
    sensor: &SensorModel,
    eps: T,
) -> (Vec<bool>, Vec<bool>) {
    let (tcells, _) = group(target, sensor);
    let (ocells, _) = group(object, sensor);
    let mut keep_t = vec![true; target.len()];
    let mut keep_o = vec![false; object.len()];
    for (cell, objs) in &ocells {
        let empty = Vec::new();
        let tgts = tcells.get(cell).unwrap_or(&empty);
        for &(oi, rho) in objs {
            // Rule (a): any target entry closer than rho - eps occludes the object point.
            let occluded = tgts.iter().any(|&(_, rt)| rt < rho - eps);
            if !occluded {
                keep_o[oi] = true;
            }
        }
        // Rule (b): every target entry farther than a kept object point + eps is removed.
        for &(ti, rt) in tgts {
            if objs.iter().any(|&(oi, rho)| keep_o[oi] && rt > rho + eps) {
                keep_t[ti] = false;
            }
        }
    }
    (keep_t, keep_o)
}

/// Keep masks `(a, b)` for fusing `b` into `a`.
pub fn fusion_oracle<T: Scalar>(a: &[Point<T>], b: &[Point<T>], sensor: &SensorModel, eps: T) -> (Vec<bool>, Vec<bool>) {
    let (acells, _) = group(a, sensor);
    let (bcells, _) = group(b, sensor);
    let mut keep_a = vec![true; a.len()];
    let mut keep_b = vec![false; b.len()];
    for (cell, bs) in &bcells {
        let min_b = bs.iter().map(|e| e.1).fold(T::infinity(), T::min);
        let a_wins = match acells.get(cell) {
            Some(as_) => {
                let min_a = as_.iter().map(|e| e.1).fold(T::infinity(), T::min);
                !(min_b < min_a - eps)
            }
            None => false,
        };
        if a_wins {
            continue;
        }
        for &(i, _) in bs {
            keep_b[i] = true;
        }
        if let Some(as_) = acells.get(cell) {
            for &(i, _) in as_ {
                keep_a[i] = false;
            }
        }
    }
    (keep_a, keep_b)
}

/// Concatenates the kept points of two clouds, first then second.
pub fn assemble<T: Scalar>(first: &[Point<T>], keep_first: &[bool], second: &[Point<T>], keep_second: &[bool]) -> Vec<Point<T>> {
    first
        .iter()
        .zip(keep_first)
        .filter(|(_, &k)| k)
        .map(|(p, _)| *p)
        .chain(second.iter().zip(keep_second).filter(|(_, &k)| k).map(|(p, _)| *p))
        .collect()
}

pub fn bit_eq_points<T: Scalar>(a: &[Point<T>], b: &[Point<T>]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.bit_eq(y))
}

/// Window of the raster random clouds are drawn in, chosen small so cells collide often.
#[derive(Clone, Copy, Debug)]
pub struct Window {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub range: (f64, f64),
}

impl Default for Window {
    fn default() -> Self {
        Self {
            rows: (0, 64),
            cols: (900, 1000),
            range: (2.0, 40.0),
        }
    }
}

fn direction(sensor: &SensorModel, row: f64, col: f64) -> [f64; 3] {
    let w = sensor.num_columns as f64;
    let h = sensor.num_beams as f64;
    let az = std::f64::consts::PI * (1.0 - 2.0 * col / w);
    let el = sensor.fov_down + (1.0 - row / h) * (sensor.fov_up - sensor.fov_down);
    [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()]
}

/// `n` random points inside `window`, with some same-direction near-ties and a few
/// points off the raster.
pub fn random_points<T: Scalar, R: Rng + ?Sized>(n: usize, sensor: &SensorModel, window: Window, rng: &mut R) -> Vec<Point<T>> {
    let mut out: Vec<Point<T>> = Vec::with_capacity(n);
    while out.len() < n {
        let roll: f64 = rng.random();
        if roll < 0.01 {
            // Above the field of view.
            let r: f64 = rng.random_range(2.0..30.0);
            out.push(Point::new(T::from_f64_lossy(r * 0.2), T::zero(), T::from_f64_lossy(r), T::zero()));
            continue;
        }
        if roll < 0.15 && !out.is_empty() {
            // Near-tie with an existing point along the same ray.
            let base = out[rng.random_range(0..out.len())];
            let scale = 1.0 + rng.random_range(-0.004..0.004);
            let s = T::from_f64_lossy(scale);
            out.push(Point::new(base.x * s, base.y * s, base.z * s, base.intensity));
            continue;
        }
        let row = rng.random_range(window.rows.0 as f64..window.rows.1 as f64);
        let col = rng.random_range(window.cols.0 as f64..window.cols.1 as f64);
        let r = rng.random_range(window.range.0..window.range.1);
        let d = direction(sensor, row, col);
        out.push(Point::new(
            T::from_f64_lossy(r * d[0]),
            T::from_f64_lossy(r * d[1]),
            T::from_f64_lossy(r * d[2]),
            T::from_f64_lossy(rng.random()),
        ));
    }
    out
}

/// Random labeled cloud; every point gets `class` and instance `instance`.
pub fn random_cloud<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    sensor: &SensorModel,
    window: Window,
    class: u16,
    instance: u16,
    rng: &mut R,
) -> PointCloud<T> {
    let pts = random_points(n, sensor, window, rng);
    PointCloud::with_labels(pts, vec![LabelRecord::new(class, instance); n]).unwrap()
}

/// Compact object-like cluster: random points in a small raster patch around
/// a random center at a random range.
pub fn random_object<T: Scalar, R: Rng + ?Sized>(n: usize, sensor: &SensorModel, window: Window, rng: &mut R) -> Vec<Point<T>> {
    let row0 = rng.random_range(window.rows.0 as f64..(window.rows.1 as f64 - 8.0).max(window.rows.0 as f64 + 1.0));
    let col0 = rng.random_range(window.cols.0 as f64..(window.cols.1 as f64 - 12.0).max(window.cols.0 as f64 + 1.0));
    let r0 = rng.random_range(window.range.0..window.range.1);
    let sub = Window {
        rows: (row0 as usize, row0 as usize + 8),
        cols: (col0 as usize, col0 as usize + 12),
        range: (r0, r0 + 1.5),
    };
    random_points(n, sensor, sub, rng)
}
