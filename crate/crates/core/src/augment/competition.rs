//! Per-cell occlusion competition on the range image.
//!
//! Injection: an instance point at range `ρ` is dropped when the target cell holds
//! a point closer than `ρ − ε`; otherwise it is kept and every target point in the
//! cell farther than `ρ + ε` is removed (overlap and lidar shadow).
//!
//! Fusion: in every cell occupied by both clouds, the cloud owning the smaller
//! minimum range wins (ties within `ε` go to the first cloud) and all of the
//! loser's points in that cell are removed.

use serde::{Deserialize, Serialize};

use crate::cloud::{LabelRecord, PointCloud};
use crate::database::{ObjectInstance, SourceRef};
use crate::error::{Error, Result};
use crate::range_image::{RangeImage, Source};
use crate::scalar::Scalar;
use crate::sensor::SensorModel;

/// Keep masks over two competing clouds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeepMasks {
    pub first: Vec<bool>,
    pub second: Vec<bool>,
}

/// Injection competition. Target points off the raster are always kept; instance
/// points off the raster are never kept.
pub fn injection_masks<T: Scalar>(target: &RangeImage<T>, target_len: usize, object: &RangeImage<T>, object_len: usize, eps: T) -> KeepMasks {
    let mut keep_target = vec![true; target_len];
    let mut keep_object = vec![false; object_len];
    for (cell, object_entries) in object.occupied() {
        let target_entries = target.cell_linear(cell);
        let Some(nearest_target) = target_entries.first().map(|e| e.range) else {
            for e in object_entries {
                keep_object[e.ordinal as usize] = true;
            }
            continue;
        };
        // Object entries ascend in range, so the unoccluded ones form a prefix.
        let mut nearest_kept = None;
        for e in object_entries {
            if nearest_target < e.range - eps {
                break;
            }
            keep_object[e.ordinal as usize] = true;
            nearest_kept.get_or_insert(e.range);
        }
        if let Some(rho) = nearest_kept {
            for t in target_entries.iter().rev() {
                if t.range > rho + eps {
                    keep_target[t.ordinal as usize] = false;
                } else {
                    break;
                }
            }
        }
    }
    KeepMasks {
        first: keep_target,
        second: keep_object,
    }
}

/// Fusion competition. Points of the first cloud off the raster are kept; points
/// of the second cloud off the raster are not.
pub fn fusion_masks<T: Scalar>(a: &RangeImage<T>, a_len: usize, b: &RangeImage<T>, b_len: usize, eps: T) -> KeepMasks {
    let mut keep_a = vec![true; a_len];
    let mut keep_b = vec![false; b_len];
    for (cell, b_entries) in b.occupied() {
        let a_entries = a.cell_linear(cell);
        let b_wins = match a_entries.first() {
            None => true,
            Some(a_min) => b_entries[0].range < a_min.range - eps,
        };
        if b_wins {
            for e in b_entries {
                keep_b[e.ordinal as usize] = true;
            }
            for e in a_entries {
                keep_a[e.ordinal as usize] = false;
            }
        }
    }
    KeepMasks {
        first: keep_a,
        second: keep_b,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    /// No instance point projects onto the raster.
    NoPointsInView,
    /// Every instance point lies behind a target point.
    FullyOccluded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionRecord {
    pub class: u16,
    pub source: SourceRef,
    /// Instance id assigned to the injected points in the output frame.
    pub instance_id: u16,
    pub points_added: usize,
    pub target_points_removed: usize,
}

pub struct Injection<T> {
    pub cloud: PointCloud<T>,
    pub masks: KeepMasks,
    pub record: InjectionRecord,
}

/// Injects an already placed instance into `target`.
///
/// Output is the surviving target points in their original order followed by the
/// surviving instance points. When the target is labeled, injected points are
/// labeled with the instance's class and a fresh instance id above the frame's maximum.
pub fn inject_instance<T: Scalar>(
    target: &PointCloud<T>,
    instance: &ObjectInstance<T>,
    sensor: &SensorModel,
    eps: T,
) -> Result<std::result::Result<Injection<T>, Rejection>> {
    let object = instance.to_cloud();
    let target_img = RangeImage::build(target, sensor, Source::Scene);
    let object_img = RangeImage::build(&object, sensor, Source::Instance(0));
    if object_img.num_entries() == 0 {
        return Ok(Err(Rejection::NoPointsInView));
    }
    let masks = injection_masks(&target_img, target.len(), &object_img, object.len(), eps);
    let added = masks.second.iter().filter(|&&k| k).count();
    if added == 0 {
        return Ok(Err(Rejection::FullyOccluded));
    }
    let removed = masks.first.iter().filter(|&&k| !k).count();
    let instance_id = target.max_instance_id().saturating_add(1);

    let mut cloud = target.filter(&masks.first);
    let survivors = object.filter(&masks.second);
    let labels = vec![LabelRecord::new(instance.semantic_class, instance_id); survivors.len()];
    cloud.push_points(survivors.points(), target.has_labels().then_some(&labels[..]))?;

    Ok(Ok(Injection {
        cloud,
        masks,
        record: InjectionRecord {
            class: instance.semantic_class,
            source: instance.source,
            instance_id,
            points_added: added,
            target_points_removed: removed,
        },
    }))
}

pub struct Fusion<T> {
    pub cloud: PointCloud<T>,
    pub masks: KeepMasks,
}

/// Fuses two clouds already placed in a common sensor frame. Output is the
/// surviving points of `a` followed by those of `b`; labels are kept only when
/// both inputs are labeled.
pub fn fuse_placed<T: Scalar>(a: &PointCloud<T>, b: &PointCloud<T>, sensor: &SensorModel, eps: T) -> Result<Fusion<T>> {
    let a_img = RangeImage::build(a, sensor, Source::Scene);
    let b_img = RangeImage::build(b, sensor, Source::Partner);
    let masks = fusion_masks(&a_img, a.len(), &b_img, b.len(), eps);
    let mut cloud = a.filter(&masks.first);
    let b_kept = b.filter(&masks.second);
    match (cloud.has_labels(), b_kept.labels()) {
        (true, Some(labels)) => cloud.push_points(b_kept.points(), Some(labels))?,
        (true, None) => {
            let (points, _) = cloud.into_parts();
            cloud = PointCloud::new(points);
            cloud.push_points(b_kept.points(), None)?;
        }
        (false, _) => cloud.push_points(b_kept.points(), None)?,
    }
    if cloud.has_labels() && cloud.labels().map(<[_]>::len) != Some(cloud.len()) {
        return Err(Error::LengthMismatch {
            points: cloud.len(),
            labels: cloud.labels().map_or(0, <[_]>::len),
        });
    }
    Ok(Fusion { cloud, masks })
}
