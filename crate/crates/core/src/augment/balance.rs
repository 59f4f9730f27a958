//! Class-balancing injection loop.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::competition::{inject_instance, InjectionRecord, Rejection};
use crate::augment::config::AugmentConfig;
use crate::augment::distribution::{compute_distribution, ClassDistribution};
use crate::augment::transform::{drop_mask, Placement};
use crate::augment::Provenance;
use crate::cloud::{FrameKey, PointCloud};
use crate::database::{InstanceDatabase, InstancePoint, ObjectInstance, SourceRef};
use crate::error::{Error, Result};
use crate::range_image::Source;
use crate::scalar::Scalar;
use crate::sensor::SensorModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Every injection class reached the desired share.
    TargetReached,
    MaxInjections,
    /// Classes below the desired share have no instances to draw from.
    PoolExhausted,
    AttemptCap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedInstance {
    #[serde(flatten)]
    pub record: InjectionRecord,
    pub placement: Placement,
    /// Instance points removed by point drop before competition.
    pub points_dropped: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedAttempt {
    pub class: u16,
    pub source: SourceRef,
    pub reason: RejectReason,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    NoPointsInView,
    FullyOccluded,
    SameFrame,
}

impl From<Rejection> for RejectReason {
    fn from(r: Rejection) -> Self {
        match r {
            Rejection::NoPointsInView => Self::NoPointsInView,
            Rejection::FullyOccluded => Self::FullyOccluded,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub injected: Vec<InjectedInstance>,
    pub rejected: Vec<RejectedAttempt>,
    pub attempts: u32,
    pub stop: StopReason,
}

/// Applies a full-circle quantized rotation, random flips and point drop to a stored
/// instance. Cells of points that stay on the raster are recomputed.
pub fn place_instance<T: Scalar, R: Rng + ?Sized>(
    instance: &ObjectInstance<f32>,
    sensor: &SensorModel,
    drop_rate: f64,
    rng: &mut R,
) -> (ObjectInstance<T>, Placement, usize) {
    let placement = Placement::random(sensor, std::f64::consts::PI, rng);
    let keep = drop_mask(instance.points.len(), drop_rate, rng);
    let points: Vec<InstancePoint<T>> = instance
        .points
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(p, _)| {
            let point = placement.apply_point(&p.point.cast::<T>(), sensor);
            let (row, col) = sensor
                .locate(point.x, point.y, point.z)
                .map_or((p.row, p.col), |(c, _)| (c.row as u16, c.col as u16));
            InstancePoint { point, row, col }
        })
        .collect();
    let dropped = instance.points.len() - points.len();
    (
        ObjectInstance {
            semantic_class: instance.semantic_class,
            points,
            source: instance.source,
        },
        placement,
        dropped,
    )
}

fn distribution_of<T: Scalar>(cloud: &PointCloud<T>) -> Result<ClassDistribution> {
    match cloud.labels() {
        None => Err(Error::MissingLabels),
        Some([]) => Ok(ClassDistribution::default()),
        Some(labels) => compute_distribution(labels),
    }
}

/// Balancing loop over a cloud with per-point provenance.
pub(crate) fn balance_tracked<T: Scalar, R: Rng + ?Sized>(
    mut cloud: PointCloud<T>,
    mut provenance: Vec<Provenance>,
    db: &InstanceDatabase,
    config: &AugmentConfig,
    frame: Option<FrameKey>,
    rng: &mut R,
) -> Result<(PointCloud<T>, Vec<Provenance>, BalanceReport)> {
    if db.sensor() != &config.sensor {
        return Err(Error::SensorMismatch);
    }
    let classes = config.sorted_classes();
    let eps = T::from_f64_lossy(config.range_epsilon);
    let max_attempts = config.max_attempts();
    let mut dist = distribution_of(&cloud)?;
    let mut report = BalanceReport {
        injected: Vec::new(),
        rejected: Vec::new(),
        attempts: 0,
        stop: StopReason::TargetReached,
    };

    report.stop = loop {
        if report.injected.len() as u32 >= config.max_injections {
            break StopReason::MaxInjections;
        }
        if report.attempts >= max_attempts {
            break StopReason::AttemptCap;
        }
        let below: Vec<u16> = classes
            .iter()
            .copied()
            .filter(|&c| dist.share(c) < config.desired_share)
            .collect();
        if below.is_empty() {
            break StopReason::TargetReached;
        }
        let eligible: Vec<u16> = below.iter().copied().filter(|&c| db.count(c) > 0).collect();
        if eligible.is_empty() {
            break StopReason::PoolExhausted;
        }

        let mut class = classes[rng.random_range(0..classes.len())];
        if !eligible.contains(&class) {
            class = eligible[rng.random_range(0..eligible.len())];
        }
        report.attempts += 1;

        let stored = db.sample(class, rng)?.expect("eligible class has instances");
        if !config.allow_self_injection && frame == Some(stored.source.frame_key()) {
            report.rejected.push(RejectedAttempt {
                class,
                source: stored.source,
                reason: RejectReason::SameFrame,
            });
            continue;
        }
        let (placed, placement, points_dropped) = place_instance::<T, _>(stored, &config.sensor, config.point_drop_rate, rng);

        match inject_instance(&cloud, &placed, &config.sensor, eps)? {
            Ok(injection) => {
                let slot = report.injected.len() as u16 + 1;
                provenance = provenance
                    .into_iter()
                    .zip(&injection.masks.first)
                    .filter_map(|(p, &k)| k.then_some(p))
                    .chain(
                        injection
                            .masks
                            .second
                            .iter()
                            .enumerate()
                            .filter(|(_, &k)| k)
                            .map(|(i, _)| Provenance::new(Source::Instance(slot), i as u32)),
                    )
                    .collect();
                cloud = injection.cloud;
                dist = distribution_of(&cloud)?;
                report.injected.push(InjectedInstance {
                    record: injection.record,
                    placement,
                    points_dropped,
                });
            }
            Err(rejection) => report.rejected.push(RejectedAttempt {
                class,
                source: stored.source,
                reason: rejection.into(),
            }),
        }
    };

    Ok((cloud, provenance, report))
}

/// Injects database instances until every injection class reaches the desired
/// share, `max_injections` succeed, the pool runs dry, or the attempt cap is hit.
pub fn balance_inject<T: Scalar, R: Rng + ?Sized>(
    cloud: &PointCloud<T>,
    db: &InstanceDatabase,
    config: &AugmentConfig,
    rng: &mut R,
) -> Result<(PointCloud<T>, BalanceReport)> {
    let provenance = Provenance::scene(cloud.len());
    let (out, _, report) = balance_tracked(cloud.clone(), provenance, db, config, None, rng)?;
    Ok((out, report))
}
