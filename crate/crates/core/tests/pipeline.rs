use lidar_forge::augment::balance::StopReason;
use lidar_forge::classes::{PERSON, ROAD};
use lidar_forge::seed::frame_rng;
use lidar_forge::synthetic::{self, SceneParams};
use lidar_forge::{
    augment_frame, balance_inject, compute_distribution, global_augment, point_drop, AugmentConfig, DatabaseConfig,
    FrameKey, InstanceDatabase, LabelRecord, MemoryScenePool, Point, PointCloud, SensorModel, Source,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scene(seed: u64, stride: usize) -> PointCloud<f32> {
    synthetic::frame(seed, &SceneParams::default(), &SensorModel::default(), stride)
}

fn person_db(frames: u32) -> InstanceDatabase {
    let params = SceneParams {
        persons: 6,
        ..SceneParams::default()
    };
    let keys: Vec<FrameKey> = (0..frames).map(|f| FrameKey::new(9, f)).collect();
    let config = DatabaseConfig {
        classes: vec![PERSON],
        ..DatabaseConfig::default()
    };
    InstanceDatabase::build_with(&keys, &config, |k| {
        Ok(synthetic::frame(1000 + k.frame as u64, &params, &SensorModel::default(), 1))
    })
    .unwrap()
}

fn pool(n: u64, stride: usize) -> MemoryScenePool<f32> {
    MemoryScenePool::new((0..n).map(|i| (FrameKey::new(1, i as u32), scene(500 + i, stride))).collect())
}

#[test]
fn disabled_pipeline_is_identity() {
    let cloud = scene(1, 8);
    let db = person_db(2);
    let out = augment_frame(
        &cloud,
        FrameKey::new(0, 0),
        Some(&db),
        &pool(2, 8),
        &AugmentConfig::disabled(),
        &mut ChaCha8Rng::seed_from_u64(1),
    )
    .unwrap();
    assert!(out.cloud.bit_eq(&cloud));
    let r = &out.report;
    assert!(!r.global_applied() && !r.fusion_applied() && !r.injection_applied());
    assert_eq!(r.injected_count(), 0);
}

#[test]
fn pipeline_is_deterministic() {
    let cloud = scene(2, 4);
    let db = person_db(2);
    let pool = pool(3, 4);
    let config = AugmentConfig {
        p_global: 1.0,
        p_fusion: 1.0,
        p_inject: 1.0,
        injection_classes: vec![PERSON],
        ..AugmentConfig::default()
    };
    let key = FrameKey::new(0, 5);
    let a = augment_frame(&cloud, key, Some(&db), &pool, &config, &mut frame_rng(42, key)).unwrap();
    let b = augment_frame(&cloud, key, Some(&db), &pool, &config, &mut frame_rng(42, key)).unwrap();
    assert!(a.cloud.bit_eq(&b.cloud));
    assert_eq!(a.report, b.report);
    assert_eq!(a.provenance, b.provenance);
}

#[test]
fn report_reconciles_and_labels_stay_parallel() {
    let db = person_db(3);
    let pool = pool(4, 4);
    let config = AugmentConfig {
        p_global: 1.0,
        p_fusion: 1.0,
        p_inject: 1.0,
        injection_classes: vec![PERSON],
        desired_share: 0.5,
        ..AugmentConfig::default()
    };
    for f in 0..20u32 {
        let key = FrameKey::new(0, f);
        let cloud = scene(f as u64, 4);
        let out = augment_frame(&cloud, key, Some(&db), &pool, &config, &mut frame_rng(7, key)).unwrap();
        let r = &out.report;
        assert_eq!(r.output_points, out.cloud.len());
        assert_eq!(r.reconciled_output(), out.cloud.len() as i64);
        assert_eq!(out.cloud.labels().unwrap().len(), out.cloud.len());
        assert_eq!(out.provenance.len(), out.cloud.len());

        // Scene and partner points are exact copies of their placed parents.
        let g = r.global.unwrap().placement;
        let fusion = r.fusion.unwrap();
        let (_, partner) = lidar_forge::ScenePool::load(&pool, fusion.partner_index).unwrap();
        let sensor = config.sensor;
        for (p, prov) in out.cloud.points().iter().zip(&out.provenance) {
            let parent = match prov.source {
                Source::Scene => g.apply_point(&cloud.points()[prov.ordinal as usize], &sensor),
                Source::Partner => fusion.placement.apply_point(&partner.points()[prov.ordinal as usize], &sensor),
                Source::Instance(_) => continue,
            };
            assert!(p.bit_eq(&parent));
        }
        let injected = r.injection.as_ref().unwrap();
        for (i, inj) in injected.injected.iter().enumerate() {
            let slot = Source::Instance(i as u16 + 1);
            let labels: Vec<LabelRecord> = out
                .provenance
                .iter()
                .zip(out.cloud.labels().unwrap())
                .filter(|(p, _)| p.source == slot)
                .map(|(_, l)| *l)
                .collect();
            // Later injections may occlude part of an earlier one.
            assert!(labels.len() <= inj.record.points_added);
            assert!(labels.iter().all(|l| l.semantic_class == PERSON && l.instance_id == inj.record.instance_id));
        }
    }
}

#[test]
fn point_drop_binomial_bound() {
    let cloud: PointCloud<f32> = (0..100_000).map(|i| Point::new(i as f32, 1.0, 0.0, 0.0)).collect();
    for seed in 0..20 {
        let out = point_drop(&cloud, 0.05, &mut ChaCha8Rng::seed_from_u64(seed));
        let n = out.len() as i64;
        assert!((n - 95_000).abs() <= 400, "seed {seed}: {n} survivors");
    }
}

#[test]
fn global_application_frequency() {
    let cloud: PointCloud<f32> = vec![Point::new(10.0, 0.0, -1.0, 0.0)].into_iter().collect();
    let config = AugmentConfig::default();
    let applied = (0..10_000u32)
        .filter(|&f| {
            global_augment(&cloud, &config, &mut frame_rng(3, FrameKey::new(0, f)))
                .record
                .is_some()
        })
        .count();
    let freq = applied as f64 / 10_000.0;
    assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
}

#[test]
fn balancing_stops_when_classes_satisfied() {
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for i in 0..1000 {
        pts.push(Point::new(5.0 + i as f32 * 0.01, 0.0, -1.0, 0.0));
        labels.push(LabelRecord::new(if i < 100 { PERSON } else { ROAD }, 0));
    }
    let cloud = PointCloud::with_labels(pts, labels).unwrap();
    let db = person_db(1);
    let config = AugmentConfig {
        injection_classes: vec![PERSON],
        ..AugmentConfig::default()
    };
    let (out, report) = balance_inject(&cloud, &db, &config, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert!(out.bit_eq(&cloud));
    assert_eq!(report.stop, StopReason::TargetReached);
    assert_eq!(report.attempts, 0);
}

#[test]
fn empty_database_leaves_cloud_unchanged() {
    let cloud = scene(4, 8);
    let db = InstanceDatabase::empty(SensorModel::default(), &[PERSON]);
    let config = AugmentConfig {
        injection_classes: vec![PERSON],
        ..AugmentConfig::default()
    };
    let (out, report) = balance_inject(&cloud, &db, &config, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert!(out.bit_eq(&cloud));
    assert!(report.injected.is_empty());
    assert_eq!(report.stop, StopReason::PoolExhausted);
}

#[test]
fn balancing_reaches_share_or_cap() {
    let params = SceneParams {
        persons: 0,
        ..SceneParams::default()
    };
    let db = person_db(4);
    assert!(db.count(PERSON) >= 10);
    let config = AugmentConfig {
        injection_classes: vec![PERSON],
        ..AugmentConfig::default()
    };
    for seed in 0..10u64 {
        let cloud = synthetic::frame(seed, &params, &SensorModel::default(), 1);
        assert!(cloud.len() > 90_000);
        let before = compute_distribution(cloud.labels().unwrap()).unwrap();
        assert_eq!(before.count(PERSON), 0);
        let (out, report) = balance_inject(&cloud, &db, &config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let share = compute_distribution(out.labels().unwrap()).unwrap().share(PERSON);
        assert!(report.attempts <= config.max_attempts());
        assert!(share >= 0.02 || report.injected.len() == 3, "seed {seed}: share {share}, {report:?}");
        match report.stop {
            StopReason::TargetReached => assert!(share >= 0.02),
            StopReason::MaxInjections => assert_eq!(report.injected.len(), 3),
            other => panic!("unexpected stop {other:?}"),
        }
    }
}

#[test]
fn self_injection_can_be_forbidden() {
    let db = person_db(1);
    let cloud = scene(3, 8);
    let config = AugmentConfig {
        injection_classes: vec![PERSON],
        allow_self_injection: false,
        ..AugmentConfig::default()
    };
    // Every stored instance comes from frame 9/0.
    let out = augment_frame(
        &cloud,
        FrameKey::new(9, 0),
        Some(&db),
        &MemoryScenePool::default(),
        &AugmentConfig {
            p_global: 0.0,
            p_fusion: 0.0,
            p_inject: 1.0,
            ..config
        },
        &mut ChaCha8Rng::seed_from_u64(1),
    )
    .unwrap();
    let b = out.report.injection.unwrap();
    assert!(b.injected.is_empty());
    assert_eq!(b.stop, StopReason::AttemptCap);
    assert_eq!(b.attempts, 30);
}

#[test]
fn failed_partner_is_recorded() {
    struct Broken;
    impl lidar_forge::ScenePool<f32> for Broken {
        fn len(&self) -> usize {
            1
        }
        fn load(&self, _: usize) -> lidar_forge::Result<(FrameKey, PointCloud<f32>)> {
            Err(lidar_forge::Error::ScenePool("unreadable".into()))
        }
    }
    let cloud = scene(5, 8);
    let config = AugmentConfig {
        p_global: 0.0,
        p_fusion: 1.0,
        p_inject: 0.0,
        ..AugmentConfig::default()
    };
    let out = augment_frame(&cloud, FrameKey::default(), None, &Broken, &config, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert!(out.cloud.bit_eq(&cloud));
    assert!(!out.report.fusion_applied());
    assert!(out.report.fusion_error.as_deref().unwrap().contains("unreadable"));
}
