//! Structure-preserving augmentation: global transforms, instance injection,
//! scene fusion, and the class-balancing frame pipeline.

pub mod balance;
pub mod competition;
pub mod config;
pub mod distribution;
pub mod pipeline;
pub mod transform;

use serde::{Deserialize, Serialize};

use crate::range_image::Source;

/// Origin of an output point: its parent and its index in that parent as loaded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Source,
    pub ordinal: u32,
}

impl Provenance {
    pub const fn new(source: Source, ordinal: u32) -> Self {
        Self { source, ordinal }
    }

    pub fn scene(n: usize) -> Vec<Self> {
        (0..n as u32).map(|i| Self::new(Source::Scene, i)).collect()
    }
}

pub use balance::{balance_inject, place_instance, BalanceReport, InjectedInstance, StopReason};
pub use competition::{fuse_placed, inject_instance, InjectionRecord, Rejection};
pub use config::AugmentConfig;
pub use distribution::{compute_distribution, ClassDistribution};
pub use pipeline::{augment_frame, fuse_scenes, AugmentReport, FrameOutput, MemoryScenePool, ScenePool};
pub use transform::{flip, global_augment, point_drop, quantized_rotation, FlipAxis, Placement};
