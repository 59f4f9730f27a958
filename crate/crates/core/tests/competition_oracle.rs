use lidar_forge::augment::competition::{fuse_placed, inject_instance};
use lidar_forge::augment::pipeline::fuse_scenes;
use lidar_forge::database::{InstancePoint, ObjectInstance, SourceRef};
use lidar_forge::{AugmentConfig, LabelRecord, PointCloud, SensorModel};
use lidar_forge_testkit::{assemble, bit_eq_points, fusion_oracle, injection_oracle, random_cloud, random_object, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f32 = 0.05;

#[test]
fn injection_matches_oracle() {
    let sensor = SensorModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..150 {
        let n = rng.random_range(1..3000);
        let m = rng.random_range(1..400);
        let target: PointCloud<f32> = random_cloud(n, &sensor, Window::default(), 40, 0, &mut rng);
        let obj = random_object::<f32, _>(m, &sensor, Window::default(), &mut rng);
        let inst = ObjectInstance {
            semantic_class: 30,
            points: obj.iter().map(|&point| InstancePoint { point, row: 0, col: 0 }).collect(),
            source: SourceRef::default(),
        };
        let (kt, ko) = injection_oracle(target.points(), &obj, &sensor, EPS);
        let expected = assemble(target.points(), &kt, &obj, &ko);
        match inject_instance(&target, &inst, &sensor, EPS).unwrap() {
            Ok(inj) => {
                assert!(bit_eq_points(inj.cloud.points(), &expected));
                let labels = inj.cloud.labels().unwrap();
                assert_eq!(labels.len(), inj.cloud.len());
                let kept_t = kt.iter().filter(|&&k| k).count();
                assert!(labels[kept_t..].iter().all(|l| *l == LabelRecord::new(30, 1)));
            }
            Err(_) => assert!(ko.iter().all(|&k| !k)),
        }
    }
}

#[test]
fn fusion_matches_oracle() {
    let sensor = SensorModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for _ in 0..150 {
        let a: PointCloud<f32> = random_cloud(rng.random_range(1..3000), &sensor, Window::default(), 40, 0, &mut rng);
        let b: PointCloud<f32> = random_cloud(rng.random_range(1..3000), &sensor, Window::default(), 50, 0, &mut rng);
        let (ka, kb) = fusion_oracle(a.points(), b.points(), &sensor, EPS);
        let expected = assemble(a.points(), &ka, b.points(), &kb);
        let fused = fuse_placed(&a, &b, &sensor, EPS).unwrap();
        assert!(bit_eq_points(fused.cloud.points(), &expected));
        assert_eq!(fused.cloud.labels().unwrap().len(), fused.cloud.len());
    }
}

#[test]
fn fuse_scenes_matches_oracle_after_placement() {
    let sensor = SensorModel::default();
    let config = AugmentConfig {
        point_drop_rate: 0.0,
        ..AugmentConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(300);
    for _ in 0..50 {
        let a: PointCloud<f32> = random_cloud(2000, &sensor, Window::default(), 40, 0, &mut rng);
        let b: PointCloud<f32> = random_cloud(2000, &sensor, Window::default(), 50, 0, &mut rng);
        let (out, placement) = fuse_scenes(&a, &b, &sensor, &config, &mut rng).unwrap();
        assert!(placement.k.abs() <= 56);
        let b_placed = placement.apply(&b, &sensor);
        let (ka, kb) = fusion_oracle(a.points(), b_placed.points(), &sensor, EPS);
        assert!(bit_eq_points(out.points(), &assemble(a.points(), &ka, b_placed.points(), &kb)));
    }
}

#[test]
fn self_fusion_is_identity() {
    let sensor = SensorModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    for _ in 0..20 {
        let a: PointCloud<f32> = random_cloud(rng.random_range(1..4000), &sensor, Window::default(), 40, 0, &mut rng);
        let fused = fuse_placed(&a, &a.clone(), &sensor, EPS).unwrap();
        assert!(fused.cloud.bit_eq(&a));
    }
}

#[test]
fn shadow_and_optimality_invariants() {
    let sensor = SensorModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for _ in 0..50 {
        let target: PointCloud<f32> = random_cloud(2000, &sensor, Window::default(), 40, 0, &mut rng);
        let obj = random_object::<f32, _>(300, &sensor, Window::default(), &mut rng);
        let inst = ObjectInstance {
            semantic_class: 30,
            points: obj.iter().map(|&point| InstancePoint { point, row: 0, col: 0 }).collect(),
            source: SourceRef::default(),
        };
        let Ok(inj) = inject_instance(&target, &inst, &sensor, EPS).unwrap() else {
            continue;
        };
        let n_target = inj.masks.first.iter().filter(|&&k| k).count();
        let mut cells: std::collections::HashMap<_, (Vec<f32>, Vec<f32>)> = Default::default();
        for (i, p) in inj.cloud.points().iter().enumerate() {
            if let Some((c, r)) = sensor.locate(p.x, p.y, p.z) {
                let e = cells.entry(c).or_default();
                if i < n_target { e.0.push(r) } else { e.1.push(r) }
            }
        }
        for (t, o) in cells.values() {
            for &ro in o {
                assert!(t.iter().all(|&rt| rt <= ro + EPS), "target point survives behind the object");
            }
        }
    }
}
