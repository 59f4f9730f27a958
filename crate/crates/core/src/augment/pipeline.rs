//! Full-frame pipeline: global augmentation, then fusion, then balanced injection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::balance::{balance_tracked, BalanceReport, StopReason};
use crate::augment::competition::fuse_placed;
use crate::augment::config::AugmentConfig;
use crate::augment::transform::{apply_global, drop_mask, GlobalRecord, Placement};
use crate::augment::Provenance;
use crate::cloud::{FrameKey, PointCloud};
use crate::database::InstanceDatabase;
use crate::error::{Error, Result};
use crate::range_image::Source;
use crate::scalar::Scalar;
use crate::sensor::SensorModel;

/// Source of fusion partners.
pub trait ScenePool<T: Scalar> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn load(&self, index: usize) -> Result<(FrameKey, PointCloud<T>)>;
}

#[derive(Clone, Debug, Default)]
pub struct MemoryScenePool<T> {
    frames: Vec<(FrameKey, PointCloud<T>)>,
}

impl<T: Scalar> MemoryScenePool<T> {
    pub fn new(frames: Vec<(FrameKey, PointCloud<T>)>) -> Self {
        Self { frames }
    }
}

impl<T: Scalar> ScenePool<T> for MemoryScenePool<T> {
    fn len(&self) -> usize {
        self.frames.len()
    }

    fn load(&self, index: usize) -> Result<(FrameKey, PointCloud<T>)> {
        self.frames
            .get(index)
            .cloned()
            .ok_or_else(|| Error::ScenePool(format!("index {index} out of range")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionRecord {
    pub partner: FrameKey,
    pub partner_index: usize,
    pub placement: Placement,
    pub partner_dropped: usize,
    /// Points of the primary cloud that lost their cell.
    pub scene_removed: usize,
    /// Partner points in the fused output.
    pub partner_added: usize,
}

/// Uniform draws in `[0, 1)` gating each stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageDraws {
    pub global: f64,
    pub fusion: f64,
    pub inject: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentReport {
    pub frame: FrameKey,
    pub input_points: usize,
    pub output_points: usize,
    pub draws: StageDraws,
    pub global: Option<GlobalRecord>,
    pub fusion: Option<FusionRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fusion_error: Option<String>,
    pub injection: Option<BalanceReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub injection_error: Option<String>,
}

impl AugmentReport {
    pub fn global_applied(&self) -> bool {
        self.global.is_some()
    }

    pub fn fusion_applied(&self) -> bool {
        self.fusion.is_some()
    }

    /// Whether the injection stage was entered (its probability gate passed).
    pub fn injection_applied(&self) -> bool {
        self.injection.is_some() || self.injection_error.is_some()
    }

    pub fn injected_count(&self) -> usize {
        self.injection.as_ref().map_or(0, |b| b.injected.len())
    }

    /// Output size implied by the recorded additions and removals.
    pub fn reconciled_output(&self) -> i64 {
        let mut n = self.input_points as i64;
        if let Some(g) = &self.global {
            n -= g.dropped as i64;
        }
        if let Some(f) = &self.fusion {
            n += f.partner_added as i64 - f.scene_removed as i64;
        }
        if let Some(b) = &self.injection {
            for i in &b.injected {
                n += i.record.points_added as i64 - i.record.target_points_removed as i64;
            }
        }
        n
    }
}

pub struct FrameOutput<T> {
    pub cloud: PointCloud<T>,
    pub provenance: Vec<Provenance>,
    pub report: AugmentReport,
}

pub(crate) struct TrackedFusion<T> {
    pub cloud: PointCloud<T>,
    pub provenance: Vec<Provenance>,
    pub placement: Placement,
    pub partner_dropped: usize,
    pub scene_removed: usize,
    pub partner_added: usize,
}

/// Places the partner `b` (rotation within `fusion_rotation_limit`, flips, point
/// drop) and fuses it into `a` by per-cell range competition.
pub(crate) fn fuse_tracked<T: Scalar, R: Rng + ?Sized>(
    a: PointCloud<T>,
    a_provenance: Vec<Provenance>,
    b: &PointCloud<T>,
    sensor: &SensorModel,
    config: &AugmentConfig,
    rng: &mut R,
) -> Result<TrackedFusion<T>> {
    let placement = Placement::random(sensor, config.fusion_rotation_limit, rng);
    let keep_b = drop_mask(b.len(), config.point_drop_rate, rng);
    let b_ordinals: Vec<u32> = (0..b.len() as u32).filter(|&i| keep_b[i as usize]).collect();
    let b_placed = placement.apply(&b.filter(&keep_b), sensor);

    let fusion = fuse_placed(&a, &b_placed, sensor, T::from_f64_lossy(config.range_epsilon))?;
    let provenance: Vec<Provenance> = a_provenance
        .into_iter()
        .zip(&fusion.masks.first)
        .filter_map(|(p, &k)| k.then_some(p))
        .chain(
            fusion
                .masks
                .second
                .iter()
                .zip(&b_ordinals)
                .filter(|(&k, _)| k)
                .map(|(_, &i)| Provenance::new(Source::Partner, i)),
        )
        .collect();
    Ok(TrackedFusion {
        scene_removed: fusion.masks.first.iter().filter(|&&k| !k).count(),
        partner_added: fusion.masks.second.iter().filter(|&&k| k).count(),
        partner_dropped: b.len() - b_ordinals.len(),
        cloud: fusion.cloud,
        provenance,
        placement,
    })
}

/// Fuses `b` into `a`. The partner receives a quantized rotation with
/// `|k·Δφ| ≤ fusion_rotation_limit`, random flips and point drop first.
pub fn fuse_scenes<T: Scalar, R: Rng + ?Sized>(
    a: &PointCloud<T>,
    b: &PointCloud<T>,
    sensor: &SensorModel,
    config: &AugmentConfig,
    rng: &mut R,
) -> Result<(PointCloud<T>, Placement)> {
    let f = fuse_tracked(a.clone(), Provenance::scene(a.len()), b, sensor, config, rng)?;
    Ok((f.cloud, f.placement))
}

/// Runs the pipeline on one frame: global augmentation (`p_global`), fusion with
/// a uniformly drawn partner (`p_fusion`), then balanced injection (`p_inject`).
/// The three gating draws are taken first, in that order.
pub fn augment_frame<T: Scalar, R: Rng + ?Sized>(
    cloud: &PointCloud<T>,
    frame: FrameKey,
    db: Option<&InstanceDatabase>,
    pool: &dyn ScenePool<T>,
    config: &AugmentConfig,
    rng: &mut R,
) -> Result<FrameOutput<T>> {
    let draws = StageDraws {
        global: rng.random(),
        fusion: rng.random(),
        inject: rng.random(),
    };
    let sensor = config.sensor;
    let mut report = AugmentReport {
        frame,
        input_points: cloud.len(),
        output_points: cloud.len(),
        draws,
        global: None,
        fusion: None,
        fusion_error: None,
        injection: None,
        injection_error: None,
    };

    let mut current = cloud.clone();
    let mut provenance = Provenance::scene(cloud.len());

    if draws.global < config.p_global {
        let g = apply_global(cloud, config, rng);
        provenance = provenance
            .into_iter()
            .zip(&g.kept)
            .filter_map(|(p, &k)| k.then_some(p))
            .collect();
        current = g.cloud;
        report.global = g.record;
    }

    if draws.fusion < config.p_fusion {
        if pool.is_empty() {
            report.fusion_error = Some("scene pool is empty".into());
        } else {
            let index = rng.random_range(0..pool.len());
            match pool.load(index) {
                Ok((partner, b)) => {
                    let f = fuse_tracked(current, provenance, &b, &sensor, config, rng)?;
                    report.fusion = Some(FusionRecord {
                        partner,
                        partner_index: index,
                        placement: f.placement,
                        partner_dropped: f.partner_dropped,
                        scene_removed: f.scene_removed,
                        partner_added: f.partner_added,
                    });
                    current = f.cloud;
                    provenance = f.provenance;
                }
                Err(e) => report.fusion_error = Some(format!("partner {index}: {e}")),
            }
        }
    }

    if draws.inject < config.p_inject {
        match db {
            Some(db) => match balance_tracked(current.clone(), provenance.clone(), db, config, Some(frame), rng) {
                Ok((c, p, b)) => {
                    current = c;
                    provenance = p;
                    report.injection = Some(b);
                }
                Err(e) => report.injection_error = Some(e.to_string()),
            },
            None => {
                report.injection = Some(BalanceReport {
                    injected: Vec::new(),
                    rejected: Vec::new(),
                    attempts: 0,
                    stop: StopReason::PoolExhausted,
                })
            }
        }
    }

    report.output_points = current.len();
    Ok(FrameOutput {
        cloud: current,
        provenance,
        report,
    })
}
