use std::f64::consts::PI;

use lidar_forge::augment::transform::Placement;
use lidar_forge::synthetic::{self, SceneParams};
use lidar_forge::{flip, quantized_rotation, CellIndex, FlipAxis, Point, PointCloud, RangeImage, SensorModel, Source};
use proptest::prelude::*;

fn center_point(sensor: &SensorModel, row: usize, col: usize, range: f64) -> Point<f64> {
    let (az, el) = sensor.cell_center(CellIndex { row, col });
    Point::new(range * el.cos() * az.cos(), range * el.cos() * az.sin(), range * el.sin(), 0.0)
}

fn cell_of(sensor: &SensorModel, p: &Point<f64>) -> CellIndex {
    sensor.locate(p.x, p.y, p.z).unwrap().0
}

proptest! {
    #[test]
    fn entries_reproject_to_their_cell(
        pts in prop::collection::vec((-60.0f32..60.0, -60.0f32..60.0, -4.0f32..2.0), 1..400)
    ) {
        let sensor = SensorModel::default();
        let cloud: PointCloud<f32> = pts.iter().map(|&(x, y, z)| Point::new(x, y, z, 0.0)).collect();
        let img = RangeImage::build(&cloud, &sensor, Source::Scene);
        prop_assert_eq!(img.num_entries() + img.out_of_view().len(), cloud.len());
        for (linear, entries) in img.occupied() {
            prop_assert!(entries.windows(2).all(|w| w[0].range <= w[1].range));
            for e in entries {
                let p = cloud.points()[e.ordinal as usize];
                let (cell, range) = sensor.locate(p.x, p.y, p.z).unwrap();
                prop_assert_eq!(sensor.linear(cell), linear);
                prop_assert_eq!(range, e.range);
            }
        }
    }

    #[test]
    fn rotation_permutes_columns(row in 1usize..63, col in 0usize..2048, k in -1024i64..=1024, range in 1.0f64..70.0) {
        let sensor = SensorModel::default();
        let cloud = PointCloud::new(vec![center_point(&sensor, row, col, range)]);
        let out = quantized_rotation(&cloud, k, &sensor, PI).unwrap();
        let cell = cell_of(&sensor, &out.points()[0]);
        prop_assert_eq!(cell.row, row);
        prop_assert_eq!(cell.col as i64, (col as i64 - k).rem_euclid(2048));
        let (r0, r1) = (cloud.points()[0].range(), out.points()[0].range());
        prop_assert!((r0 - r1).abs() <= 1e-6 * r0);
    }

    #[test]
    fn flips_permute_columns(row in 1usize..63, col in 0usize..2048, range in 1.0f64..70.0) {
        let sensor = SensorModel::default();
        let w = 2048i64;
        let cloud = PointCloud::new(vec![center_point(&sensor, row, col, range)]);

        // y → −y maps φ to −φ.
        let fy = flip(&cloud, FlipAxis::Y);
        let cell = cell_of(&sensor, &fy.points()[0]);
        prop_assert_eq!(cell.row, row);
        prop_assert_eq!(cell.col as i64, w - 1 - col as i64);

        // x → −x maps φ to π − φ.
        let fx = flip(&cloud, FlipAxis::X);
        let cell = cell_of(&sensor, &fx.points()[0]);
        prop_assert_eq!(cell.row, row);
        prop_assert_eq!(cell.col as i64, (w / 2 - 1 - col as i64).rem_euclid(w));

        for out in [&fx, &fy] {
            let (r0, r1) = (cloud.points()[0].range(), out.points()[0].range());
            prop_assert!((r0 - r1).abs() <= 1e-6 * r0);
        }
    }

    #[test]
    fn placement_preserves_ranges_f32(k in -1024i64..=1024, fx: bool, fy: bool,
        pts in prop::collection::vec((-60.0f32..60.0, -60.0f32..60.0, -4.0f32..2.0), 1..50)) {
        let sensor = SensorModel::default();
        let cloud: PointCloud<f32> = pts.iter().map(|&(x, y, z)| Point::new(x, y, z, 0.0)).collect();
        let out = Placement { k, flip_x: fx, flip_y: fy }.apply(&cloud, &sensor);
        for (a, b) in cloud.points().iter().zip(out.points()) {
            let (ra, rb) = (a.range() as f64, b.range() as f64);
            prop_assert!((ra - rb).abs() <= 1e-6 * ra.max(1.0));
        }
    }
}

#[test]
fn full_frame_counting_oracle() {
    let sensor = SensorModel::default();
    // Dense frame: one ray per cell.
    let cloud = synthetic::frame(11, &SceneParams::default(), &sensor, 1);
    assert!(cloud.len() > 100_000, "fixture has {} points", cloud.len());

    let in_view = cloud.points().iter().filter(|p| sensor.locate(p.x, p.y, p.z).is_some()).count();
    let mut occupied = std::collections::HashSet::new();
    for p in cloud.points() {
        if let Some((c, _)) = sensor.locate(p.x, p.y, p.z) {
            occupied.insert(c);
        }
    }

    let img = RangeImage::build(&cloud, &sensor, Source::Scene);
    assert_eq!(img.num_entries(), in_view);
    assert_eq!(img.num_occupied(), occupied.len());
    assert!(img.num_occupied() <= 64 * 2048);
}

#[test]
fn generic_over_f64() {
    let sensor = SensorModel::default();
    let c32 = synthetic::frame(2, &SceneParams::default(), &sensor, 16);
    let c64 = c32.cast::<f64>();
    let i32_ = RangeImage::build(&c32, &sensor, Source::Scene);
    let i64_ = RangeImage::build(&c64, &sensor, Source::Scene);
    assert_eq!(i32_.num_entries(), i64_.num_entries());
}
