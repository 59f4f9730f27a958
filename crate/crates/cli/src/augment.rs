use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use lidar_forge::io::{encode_labels, encode_points, read_points, read_scan};
use lidar_forge::pose::{compensate_frame, EgoMotionStatus};
use lidar_forge::seed::frame_rng;
use lidar_forge::{
    augment_frame, AugmentConfig, AugmentReport, FrameKey, InstanceDatabase, PointCloud, Pose, ScenePool,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{write_atomic, FrameRef};

pub const REPORT_FILE: &str = "augment_report.jsonl";

/// Frames on disk, optionally ego-motion compensated on load.
pub struct DiskFrames<'a> {
    pub frames: &'a [FrameRef],
    pub poses: BTreeMap<u32, Option<Vec<Pose>>>,
    pub undo_ego_motion: bool,
    pub config: &'a AugmentConfig,
}

impl DiskFrames<'_> {
    fn read(&self, f: &FrameRef) -> lidar_forge::Result<(PointCloud<f32>, Option<EgoMotionStatus>)> {
        let cloud = match &f.labels {
            Some(labels) => read_scan(&f.scan, labels)?,
            None => read_points(&f.scan)?,
        };
        if !self.undo_ego_motion {
            return Ok((cloud, None));
        }
        let poses = self.poses.get(&f.key.sequence).and_then(|p| p.as_deref());
        let (cloud, status) = compensate_frame(&cloud, poses, f.key.frame as usize, &self.config.sensor);
        Ok((cloud, Some(status)))
    }
}

impl ScenePool<f32> for DiskFrames<'_> {
    fn len(&self) -> usize {
        self.frames.len()
    }

    fn load(&self, index: usize) -> lidar_forge::Result<(FrameKey, PointCloud<f32>)> {
        let f = &self.frames[index];
        Ok((f.key, self.read(f)?.0))
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum ReportLine {
    Done {
        #[serde(flatten)]
        report: Box<AugmentReport>,
        #[serde(skip_serializing_if = "Option::is_none")]
        ego_motion: Option<EgoMotionStatus>,
    },
    Failed {
        frame: FrameKey,
        error: String,
    },
}

pub struct Summary {
    pub frames: usize,
    pub failed: usize,
    pub global: usize,
    pub fusion: usize,
    pub injection: usize,
    pub injected: usize,
}

fn process(
    f: &FrameRef,
    pool: &DiskFrames,
    db: Option<&InstanceDatabase>,
    out: &Path,
) -> Result<(AugmentReport, Option<EgoMotionStatus>)> {
    let config = pool.config;
    let (cloud, ego) = pool.read(f)?;
    let mut rng = frame_rng(config.seed, f.key);
    let output = augment_frame(&cloud, f.key, db, pool, config, &mut rng)?;
    write_atomic(&out.join(f.relative_scan()), &encode_points(output.cloud.points()))?;
    if let Some(labels) = output.cloud.labels() {
        write_atomic(&out.join(f.relative_labels()), &encode_labels(labels))?;
    }
    Ok((output.report, ego))
}

/// Augments every frame of `pool` into `out`, in parallel, and writes the report
/// sorted by frame so the output tree does not depend on scheduling.
pub fn run(pool: &DiskFrames, db: Option<&InstanceDatabase>, out: &Path) -> Result<Summary> {
    let lines: Vec<ReportLine> = pool
        .frames
        .par_iter()
        .map(|f| match process(f, pool, db, out) {
            Ok((report, ego_motion)) => ReportLine::Done {
                report: Box::new(report),
                ego_motion,
            },
            Err(e) => {
                log::error!("frame {}: {e:#}", f.key);
                ReportLine::Failed {
                    frame: f.key,
                    error: format!("{e:#}"),
                }
            }
        })
        .collect();

    let mut summary = Summary {
        frames: lines.len(),
        failed: 0,
        global: 0,
        fusion: 0,
        injection: 0,
        injected: 0,
    };
    let mut text = String::new();
    for line in &lines {
        match line {
            ReportLine::Done { report, .. } => {
                summary.global += report.global_applied() as usize;
                summary.fusion += report.fusion_applied() as usize;
                summary.injection += report.injection_applied() as usize;
                summary.injected += report.injected_count();
            }
            ReportLine::Failed { .. } => summary.failed += 1,
        }
        text.push_str(&serde_json::to_string(line).context("serializing report")?);
        text.push('\n');
    }
    write_atomic(&out.join(REPORT_FILE), text.as_bytes())?;
    Ok(summary)
}
