//! Ray-cast street scenes in the dataset's layout, for fixtures and demos.
//!
//! Rays follow the beam grid with sub-cell jitter; each hit is labeled with the
//! class and instance id of the surface it struck.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classes::*;
use crate::cloud::{LabelRecord, Point, PointCloud};
use crate::error::{Error, Result};
use crate::io;
use crate::sensor::{CellIndex, SensorModel};

pub const SENSOR_HEIGHT: f64 = 1.73;
pub const MAX_RANGE: f64 = 80.0;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    /// Axis-aligned box `[min, max]`.
    Box { min: [f64; 3], max: [f64; 3] },
    /// Vertical cylinder.
    Cylinder { center: [f64; 2], radius: f64, z: [f64; 2] },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Object {
    shape: Shape,
    pub label: LabelRecord,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub objects: Vec<Object>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneParams {
    pub cars: usize,
    pub persons: usize,
    pub bicycles: usize,
    pub bicyclists: usize,
    pub other_vehicles: usize,
    pub trucks: usize,
    pub motorcycles: usize,
    pub poles: usize,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            cars: 10,
            persons: 2,
            bicycles: 1,
            bicyclists: 1,
            other_vehicles: 1,
            trucks: 1,
            motorcycles: 1,
            poles: 6,
        }
    }
}

fn ground_z() -> f64 {
    -SENSOR_HEIGHT
}

impl Scene {
    pub fn random<R: Rng + ?Sized>(params: &SceneParams, rng: &mut R) -> Self {
        let mut objects = Vec::new();
        let mut next_id = 1u16;
        let g = ground_z();

        // Building rows with gaps on both sides of the street.
        for side in [-1.0, 1.0] {
            let mut x = -60.0;
            while x < 60.0 {
                let len = rng.random_range(6.0..20.0);
                if rng.random_bool(0.75) {
                    let y0 = side * rng.random_range(10.0..14.0);
                    let depth = rng.random_range(5.0..10.0);
                    let (ylo, yhi) = if side > 0.0 { (y0, y0 + depth) } else { (y0 - depth, y0) };
                    objects.push(Object {
                        shape: Shape::Box {
                            min: [x, ylo, g],
                            max: [x + len, yhi, g + rng.random_range(4.0..15.0)],
                        },
                        label: LabelRecord::new(BUILDING, 0),
                    });
                }
                x += len + rng.random_range(1.0..6.0);
            }
        }

        let mut place = |class: u16, size: [f64; 3], y_band: (f64, f64), count: usize, objects: &mut Vec<Object>, rng: &mut R| {
            for _ in 0..count {
                let (cx, cy) = loop {
                    let cx: f64 = rng.random_range(-40.0..40.0);
                    let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    let cy: f64 = side * rng.random_range(y_band.0..y_band.1);
                    if cx.abs() > size[0] / 2.0 + 3.5 || cy.abs() > size[1] / 2.0 + 2.5 {
                        break (cx, cy);
                    }
                };
                let (dx, dy) = if rng.random_bool(0.8) { (size[0], size[1]) } else { (size[1], size[0]) };
                objects.push(Object {
                    shape: Shape::Box {
                        min: [cx - dx / 2.0, cy - dy / 2.0, g],
                        max: [cx + dx / 2.0, cy + dy / 2.0, g + size[2]],
                    },
                    label: LabelRecord::new(class, next_id),
                });
                next_id += 1;
            }
        };

        place(CAR, [4.2, 1.8, 1.5], (2.0, 6.5), params.cars, &mut objects, rng);
        place(TRUCK, [8.0, 2.5, 3.5], (2.0, 5.0), params.trucks, &mut objects, rng);
        place(OTHER_VEHICLE, [5.0, 2.2, 2.6], (2.0, 5.0), params.other_vehicles, &mut objects, rng);
        place(PERSON, [0.6, 0.6, 1.75], (6.0, 9.0), params.persons, &mut objects, rng);
        place(BICYCLE, [1.7, 0.5, 1.1], (6.0, 9.0), params.bicycles, &mut objects, rng);
        place(BICYCLIST, [1.7, 0.6, 1.8], (1.0, 4.0), params.bicyclists, &mut objects, rng);
        place(MOTORCYCLE, [2.0, 0.8, 1.2], (6.0, 9.0), params.motorcycles, &mut objects, rng);

        for _ in 0..params.poles {
            let cx = rng.random_range(-40.0..40.0);
            let cy = if rng.random_bool(0.5) { 7.5 } else { -7.5 } + rng.random_range(-0.5..0.5);
            objects.push(Object {
                shape: Shape::Cylinder {
                    center: [cx, cy],
                    radius: 0.12,
                    z: [g, g + 6.0],
                },
                label: LabelRecord::new(POLE, 0),
            });
        }

        Self { objects }
    }

    fn ground_label(x: f64, y: f64) -> LabelRecord {
        let _ = x;
        let class = match y.abs() {
            a if a < 4.5 => ROAD,
            a if a < 7.0 => PARKING,
            a if a < 9.5 => SIDEWALK,
            _ => TERRAIN,
        };
        LabelRecord::new(class, 0)
    }

    /// Nearest hit along the unit direction `d`.
    pub fn cast(&self, d: [f64; 3]) -> Option<(f64, LabelRecord)> {
        let mut best: Option<(f64, LabelRecord)> = None;
        let mut consider = |t: f64, label: LabelRecord| {
            if t > 0.5 && t < MAX_RANGE && best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, label));
            }
        };
        if d[2] < 0.0 {
            let t = ground_z() / d[2];
            consider(t, Self::ground_label(t * d[0], t * d[1]));
        }
        for obj in &self.objects {
            if let Some(t) = intersect(&obj.shape, d) {
                consider(t, obj.label);
            }
        }
        best
    }

    /// Casts one ray per cell of every `column_stride`-th column.
    pub fn scan<R: Rng + ?Sized>(&self, sensor: &SensorModel, column_stride: usize, rng: &mut R) -> PointCloud<f32> {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        let dphi = sensor.delta_phi();
        let dtheta = (sensor.fov_up - sensor.fov_down) / sensor.num_beams as f64;
        for col in (0..sensor.num_columns).step_by(column_stride.max(1)) {
            for row in 0..sensor.num_beams {
                let (az, el) = sensor.cell_center(CellIndex { row, col });
                let az = az + rng.random_range(-0.4..0.4) * dphi;
                let el = el + rng.random_range(-0.3..0.3) * dtheta;
                let d = [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()];
                if let Some((t, label)) = self.cast(d) {
                    let t = t + rng.random_range(-0.01..0.01);
                    points.push(Point::new(
                        (t * d[0]) as f32,
                        (t * d[1]) as f32,
                        (t * d[2]) as f32,
                        rng.random_range(0.0..1.0) as f32,
                    ));
                    labels.push(label);
                }
            }
        }
        PointCloud::with_labels(points, labels).expect("parallel vectors")
    }
}

fn intersect(shape: &Shape, d: [f64; 3]) -> Option<f64> {
    match *shape {
        Shape::Box { min, max } => {
            let (mut t0, mut t1) = (0.0_f64, f64::INFINITY);
            for i in 0..3 {
                if d[i].abs() < 1e-12 {
                    if 0.0 < min[i] || 0.0 > max[i] {
                        return None;
                    }
                } else {
                    let (a, b) = (min[i] / d[i], max[i] / d[i]);
                    t0 = t0.max(a.min(b));
                    t1 = t1.min(a.max(b));
                }
            }
            (t0 <= t1 && t0 > 0.0).then_some(t0)
        }
        Shape::Cylinder { center, radius, z } => {
            let a = d[0] * d[0] + d[1] * d[1];
            if a < 1e-12 {
                return None;
            }
            let b = -2.0 * (d[0] * center[0] + d[1] * center[1]);
            let c = center[0] * center[0] + center[1] * center[1] - radius * radius;
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                return None;
            }
            let t = (-b - disc.sqrt()) / (2.0 * a);
            let hz = t * d[2];
            (t > 0.0 && hz >= z[0] && hz <= z[1]).then_some(t)
        }
    }
}

/// One synthetic labeled frame.
pub fn frame(seed: u64, params: &SceneParams, sensor: &SensorModel, column_stride: usize) -> PointCloud<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scene = Scene::random(params, &mut rng);
    scene.scan(sensor, column_stride, &mut rng)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetParams {
    pub sequences: u32,
    pub frames_per_sequence: u32,
    pub column_stride: usize,
    pub seed: u64,
    /// Forward speed in meters per frame, written to `poses.txt`.
    pub speed: f64,
}

impl Default for DatasetParams {
    fn default() -> Self {
        Self {
            sequences: 1,
            frames_per_sequence: 10,
            column_stride: 4,
            seed: 0,
            speed: 1.0,
        }
    }
}

/// Writes `sequences/NN/{velodyne,labels}/NNNNNN.{bin,label}`, `poses.txt` and `calib.txt`.
pub fn write_dataset(root: &Path, params: &DatasetParams, scene: &SceneParams, sensor: &SensorModel) -> Result<()> {
    for seq in 0..params.sequences {
        let dir = root.join("sequences").join(format!("{seq:02}"));
        let velodyne = dir.join("velodyne");
        let labels = dir.join("labels");
        for d in [&velodyne, &labels] {
            fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        }
        let mut poses = String::new();
        for f in 0..params.frames_per_sequence {
            let seed = params.seed ^ ((seq as u64) << 32 | f as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let cloud = frame(seed, scene, sensor, params.column_stride);
            io::write_points(&cloud, velodyne.join(format!("{f:06}.bin")))?;
            io::write_labels(cloud.labels().unwrap(), labels.join(format!("{f:06}.label")))?;
            // Camera frame: forward is +z.
            poses.push_str(&format!("1 0 0 0 0 1 0 0 0 0 1 {:.6}\n", f as f64 * params.speed));
        }
        let write = |name: &str, text: &str| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        write("poses.txt", &poses)?;
        write("calib.txt", "Tr: 0 -1 0 0 0 0 -1 0 1 0 0 0\n")?;
    }
    Ok(())
}
