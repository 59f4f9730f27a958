//! Structure-preserving augmentation for rotating-lidar point clouds.
//!
//! Every operation works on the sensor's range-image raster: clouds are only
//! rotated in multiples of the horizontal resolution, flipped, or thinned, and
//! points from different sources compete per cell so the closer one survives.
//! Outputs therefore keep the scanline structure of real scans.
//!
//! Geometry and competition are generic over [`Scalar`] (`f32` or `f64`); the
//! dataset and database file formats are `f32`.

pub mod augment;
pub mod classes;
pub mod cloud;
pub mod database;
pub mod error;
pub mod io;
pub mod pose;
pub mod range_image;
pub mod scalar;
pub mod seed;
pub mod sensor;
pub mod synthetic;

pub use augment::{
    augment_frame, balance_inject, compute_distribution, flip, fuse_scenes, global_augment, inject_instance,
    point_drop, quantized_rotation, AugmentConfig, AugmentReport, ClassDistribution, FlipAxis, FrameOutput,
    MemoryScenePool, Placement, Provenance, ScenePool,
};
pub use cloud::{FrameKey, LabelRecord, Point, PointCloud};
pub use database::{
    build_database, extract_instances, load_database, save_database, DatabaseConfig, InstanceDatabase,
    ObjectInstance,
};
pub use error::{Error, Result};
pub use pose::{undo_ego_motion, Pose};
pub use range_image::{RangeImage, Source};
pub use scalar::Scalar;
pub use sensor::{to_spherical, CellIndex, SensorModel, SphericalPoint};

pub type PointF32 = Point<f32>;
pub type PointF64 = Point<f64>;
pub type PointCloudF32 = PointCloud<f32>;
pub type PointCloudF64 = PointCloud<f64>;
pub type RangeImageF32 = RangeImage<f32>;
pub type RangeImageF64 = RangeImage<f64>;
pub type ObjectInstanceF32 = ObjectInstance<f32>;
pub type ObjectInstanceF64 = ObjectInstance<f64>;
