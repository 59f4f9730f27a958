//! `lidar-forge`: instance database building, dataset augmentation, class
//! statistics and range-image rendering.
//!
//! Exit codes: 0 success, 1 some frames failed, 2 invalid invocation.

mod augment;
mod dataset;
mod render;
mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use lidar_forge::database::{FrameFiles, Manifest};
use lidar_forge::io::{read_points, read_scan};
use lidar_forge::synthetic::{write_dataset, DatasetParams, SceneParams};
use lidar_forge::{
    augment_frame, build_database, classes, load_database, AugmentConfig, FrameKey, InstanceDatabase,
    MemoryScenePool, PointCloud,
};

use crate::dataset::{ensure_distinct, parse_frame_key, parse_frame_range, write_atomic, Selection};

pub const DB_FILE: &str = "instances.lfdb";
pub const MANIFEST_FILE: &str = "db_manifest.json";

/// Invalid invocation; maps to exit code 2.
#[derive(Debug)]
pub struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: String) -> anyhow::Error {
    Usage(msg).into()
}

#[derive(Parser)]
#[command(name = "lidar-forge", version, about = "Structure-preserving lidar point-cloud augmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract object instances from labeled frames into a database file.
    BuildDb(Common),
    /// Augment frames and write `.bin`/`.label` pairs plus a per-frame report.
    Augment(AugmentArgs),
    /// Per-class point counts, shares and frame coverage.
    Stats(Common),
    /// Render range, class and (when fused) provenance images of one frame.
    Render(RenderArgs),
    /// Write a synthetic labeled dataset (for fixtures and smoke tests).
    Synth(SynthArgs),
}

#[derive(Args)]
struct Common {
    /// Dataset root containing `sequences/`.
    #[arg(long)]
    data: PathBuf,
    /// Output root; must differ from --data.
    #[arg(long)]
    out: PathBuf,
    /// JSON augmentation config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated sequence ids (default: all).
    #[arg(long, value_delimiter = ',')]
    sequences: Vec<u32>,
    /// Frame-id range START:END (half-open).
    #[arg(long, value_parser = parse_frame_range)]
    frames: Option<Range<u32>>,
    /// Keep every n-th frame of each sequence.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    stride: u32,
    /// Worker threads (default: one per core). Output does not depend on this.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
}

#[derive(Args)]
struct AugmentArgs {
    #[command(flatten)]
    common: Common,
    /// Instance database file (or a directory containing one); required when p_inject > 0.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Undo ego-motion with the sequence's poses before augmenting.
    #[arg(long)]
    undo_ego_motion: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Frame to render, SEQ:FRAME.
    #[arg(long, value_parser = parse_frame_key)]
    frame: FrameKey,
    /// Fuse this frame (SEQ:FRAME) into --frame before rendering.
    #[arg(long, value_parser = parse_frame_key)]
    fuse_with: Option<FrameKey>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    num_sequences: u32,
    #[arg(long, default_value_t = 10)]
    frames_per_sequence: u32,
    /// Keep every n-th azimuth column of the simulated sensor.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    column_stride: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Forward motion per frame in meters.
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
}

enum Outcome {
    Success,
    Partial,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::BuildDb(c) => cmd_build_db(&c),
        Command::Augment(a) => cmd_augment(&a),
        Command::Stats(c) => cmd_stats(&c),
        Command::Render(r) => cmd_render(&r),
        Command::Synth(s) => cmd_synth(&s),
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<AugmentConfig> {
    let mut config = match path {
        Some(p) => AugmentConfig::load(p).map_err(|e| usage(e.to_string()))?,
        None => AugmentConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

impl Common {
    fn selection(&self) -> Selection {
        Selection {
            sequences: self.sequences.clone(),
            frames: self.frames.clone(),
            stride: self.stride as usize,
        }
    }

    fn prepare(&self) -> Result<AugmentConfig> {
        ensure_distinct(&self.data, &self.out)?;
        if !self.data.is_dir() {
            return Err(usage(format!("--data {} is not a directory", self.data.display())));
        }
        load_config(self.config.as_deref(), self.seed)
    }

    fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.workers {
            b = b.num_threads(n as usize);
        }
        b.build().context("starting worker pool")
    }
}

fn print_manifest(m: &Manifest) {
    println!("{:>5}  {:<20} {:>10}", "class", "name", "instances");
    for (&class, &n) in &m.counts {
        println!("{:>5}  {:<20} {:>10}", class, classes::name(class), n);
    }
    println!("{} instances from {} frames, {} frame errors", m.total, m.frames_scanned, m.errors.len());
    for e in &m.errors {
        println!("  {}: {}", e.frame, e.message);
    }
}

fn cmd_build_db(c: &Common) -> Result<Outcome> {
    let config = c.prepare()?;
    let frames: Vec<FrameFiles> = dataset::select(&c.data, &c.selection(), true)?
        .into_iter()
        .map(|f| FrameFiles {
            key: f.key,
            scan: f.scan,
            labels: f.labels.expect("labels required"),
        })
        .collect();
    let db = build_database(&frames, &config.database_config())?;
    std::fs::create_dir_all(&c.out).with_context(|| format!("creating {}", c.out.display()))?;
    write_atomic(&c.out.join(DB_FILE), &db.to_bytes())?;
    let manifest = db.manifest();
    write_atomic(&c.out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    print_manifest(&manifest);
    Ok(if manifest.errors.is_empty() { Outcome::Success } else { Outcome::Partial })
}

fn open_database(path: &Path, config: &AugmentConfig) -> Result<InstanceDatabase> {
    let file = if path.is_dir() { path.join(DB_FILE) } else { path.to_path_buf() };
    if !file.is_file() {
        return Err(usage(format!("database {} does not exist", file.display())));
    }
    let db = load_database(&file)?;
    if db.sensor() != &config.sensor {
        return Err(usage(format!("database {} was built for a different sensor", file.display())));
    }
    Ok(db)
}

fn cmd_augment(a: &AugmentArgs) -> Result<Outcome> {
    let c = &a.common;
    let config = c.prepare()?;
    let db = match &a.db {
        Some(p) => Some(open_database(p, &config)?),
        None if config.p_inject > 0.0 => return Err(usage("--db is required when p_inject > 0".to_string())),
        None => None,
    };
    let frames = dataset::select(&c.data, &c.selection(), false)?;
    let poses: BTreeMap<u32, _> = if a.undo_ego_motion {
        frames
            .iter()
            .map(|f| (f.key.sequence, f.sequence_dir.as_str()))
            .collect::<BTreeMap<_, _>>()
            .into_iter()
            .map(|(seq, dir)| (seq, dataset::sequence_poses(&c.data, dir)))
            .collect()
    } else {
        BTreeMap::new()
    };
    let pool = augment::DiskFrames {
        frames: &frames,
        poses,
        undo_ego_motion: a.undo_ego_motion,
        config: &config,
    };
    std::fs::create_dir_all(&c.out).with_context(|| format!("creating {}", c.out.display()))?;
    let s = c.thread_pool()?.install(|| augment::run(&pool, db.as_ref(), &c.out))?;
    println!(
        "{} frames, {} failed; global {}, fusion {}, injection {} ({} instances)",
        s.frames, s.failed, s.global, s.fusion, s.injection, s.injected
    );
    Ok(if s.failed == 0 { Outcome::Success } else { Outcome::Partial })
}

fn cmd_stats(c: &Common) -> Result<Outcome> {
    c.prepare()?;
    let frames = dataset::select(&c.data, &c.selection(), true)?;
    let rows = c.thread_pool()?.install(|| stats::collect(&frames))?;
    print!("{}", stats::table(&rows, frames.len()));
    write_atomic(&c.out.join(stats::CSV_FILE), &stats::csv_bytes(&rows)?)?;
    Ok(Outcome::Success)
}

fn read_frame(data: &Path, key: FrameKey) -> Result<PointCloud<f32>> {
    let base = data.join("sequences").join(format!("{:02}", key.sequence));
    let scan = base.join("velodyne").join(format!("{:06}.bin", key.frame));
    if !scan.is_file() {
        return Err(usage(format!("frame {key} not found at {}", scan.display())));
    }
    let labels = base.join("labels").join(format!("{:06}.label", key.frame));
    Ok(if labels.is_file() { read_scan(&scan, &labels)? } else { read_points(&scan)? })
}

fn cmd_render(r: &RenderArgs) -> Result<Outcome> {
    ensure_distinct(&r.data, &r.out)?;
    let config = load_config(r.config.as_deref(), r.seed)?;
    let sensor = config.sensor;
    let mut cloud = read_frame(&r.data, r.frame)?;
    let stem = format!("{:02}_{:06}", r.frame.sequence, r.frame.frame);
    let png = |name: String, img: image::DynamicImage| -> Result<()> {
        let path = r.out.join(name);
        write_atomic(&path, &render::encode_png(&img)?)?;
        println!("wrote {}", path.display());
        Ok(())
    };

    if let Some(partner_key) = r.fuse_with {
        let partner = read_frame(&r.data, partner_key)?;
        let fuse_only = AugmentConfig {
            p_global: 0.0,
            p_fusion: 1.0,
            p_inject: 0.0,
            ..config.clone()
        };
        let pool = MemoryScenePool::new(vec![(partner_key, partner)]);
        let mut rng = lidar_forge::seed::frame_rng(config.seed, r.frame);
        let out = augment_frame(&cloud, r.frame, None, &pool, &fuse_only, &mut rng)?;
        png(
            format!("{stem}_provenance.png"),
            render::provenance_image(&out.cloud, &out.provenance, &sensor).into(),
        )?;
        cloud = out.cloud;
    }
    png(format!("{stem}_range.png"), render::range_image(&cloud, &sensor).into())?;
    if let Some(img) = render::class_image(&cloud, &sensor) {
        png(format!("{stem}_classes.png"), img.into())?;
    }
    Ok(Outcome::Success)
}

fn cmd_synth(s: &SynthArgs) -> Result<Outcome> {
    let params = DatasetParams {
        sequences: s.num_sequences,
        frames_per_sequence: s.frames_per_sequence,
        column_stride: s.column_stride as usize,
        seed: s.seed,
        speed: s.speed,
    };
    write_dataset(&s.out, &params, &SceneParams::default(), &Default::default())?;
    println!("wrote {} frames under {}", s.num_sequences * s.frames_per_sequence, s.out.display());
    Ok(Outcome::Success)
}
