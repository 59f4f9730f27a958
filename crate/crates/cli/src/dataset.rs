//! Dataset layout: `<root>/sequences/<NN>/{velodyne/*.bin, labels/*.label, poses.txt, calib.txt}`.

use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lidar_forge::pose::{poses_in_lidar_frame, read_calibration, read_poses};
use lidar_forge::{FrameKey, Pose};

use crate::usage;

#[derive(Clone, Debug, Default)]
pub struct Selection {
    /// Empty selects every sequence.
    pub sequences: Vec<u32>,
    pub frames: Option<Range<u32>>,
    pub stride: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameRef {
    pub key: FrameKey,
    pub sequence_dir: String,
    pub stem: String,
    pub scan: PathBuf,
    /// `None` when the sequence has no `labels` directory.
    pub labels: Option<PathBuf>,
}

impl FrameRef {
    pub fn relative_scan(&self) -> PathBuf {
        Path::new("sequences").join(&self.sequence_dir).join("velodyne").join(format!("{}.bin", self.stem))
    }

    pub fn relative_labels(&self) -> PathBuf {
        Path::new("sequences").join(&self.sequence_dir).join("labels").join(format!("{}.label", self.stem))
    }
}

fn numbered_entries(dir: &Path, ext: Option<&str>, dirs: bool) -> Result<Vec<(u32, String)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.is_dir() != dirs || (ext.is_some() && path.extension().and_then(|e| e.to_str()) != ext) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
        if let Ok(id) = stem.parse::<u32>() {
            out.push((id, stem.to_string()));
        }
    }
    out.sort();
    Ok(out)
}

/// Lists the selected frames in `(sequence, frame)` order. The stride keeps every
/// n-th frame of each sequence after the frame-range filter.
pub fn select(root: &Path, selection: &Selection, require_labels: bool) -> Result<Vec<FrameRef>> {
    let seq_root = root.join("sequences");
    if !seq_root.is_dir() {
        return Err(usage(format!("{} has no sequences directory", root.display())));
    }
    let available = numbered_entries(&seq_root, None, true)?;
    let mut chosen = Vec::new();
    if selection.sequences.is_empty() {
        chosen = available;
    } else {
        for &s in &selection.sequences {
            match available.iter().find(|(id, _)| *id == s) {
                Some(found) => chosen.push(found.clone()),
                None => return Err(usage(format!("sequence {s:02} not found under {}", seq_root.display()))),
            }
        }
        chosen.sort();
        chosen.dedup();
    }

    let mut frames = Vec::new();
    for (seq, dir) in chosen {
        let base = seq_root.join(&dir);
        let velodyne = base.join("velodyne");
        if !velodyne.is_dir() {
            return Err(usage(format!("missing directory {}", velodyne.display())));
        }
        let labels = base.join("labels");
        let has_labels = labels.is_dir();
        if require_labels && !has_labels {
            return Err(usage(format!("missing labels directory {}", labels.display())));
        }
        let scans = numbered_entries(&velodyne, Some("bin"), false)?;
        let in_range = scans
            .into_iter()
            .filter(|(id, _)| selection.frames.as_ref().is_none_or(|r| r.contains(id)));
        for (id, stem) in in_range.step_by(selection.stride.max(1)) {
            frames.push(FrameRef {
                key: FrameKey::new(seq, id),
                sequence_dir: dir.clone(),
                scan: velodyne.join(format!("{stem}.bin")),
                labels: has_labels.then(|| labels.join(format!("{stem}.label"))),
                stem,
            });
        }
    }
    Ok(frames)
}

/// Poses of a sequence in the lidar frame, or `None` when `poses.txt` is absent
/// or unreadable. Without `calib.txt` the poses are taken as lidar poses.
pub fn sequence_poses(root: &Path, sequence_dir: &str) -> Option<Vec<Pose>> {
    let base = root.join("sequences").join(sequence_dir);
    let poses_path = base.join("poses.txt");
    if !poses_path.is_file() {
        return None;
    }
    let poses = match read_poses(&poses_path) {
        Ok(p) => p,
        Err(e) => {
            log::warn!("ignoring poses: {e}");
            return None;
        }
    };
    let calib = base.join("calib.txt");
    if !calib.is_file() {
        return Some(poses);
    }
    match read_calibration(&calib) {
        Ok(Some(tr)) => Some(poses_in_lidar_frame(&poses, &tr)),
        Ok(None) => Some(poses),
        Err(e) => {
            log::warn!("ignoring poses: {e}");
            None
        }
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn resolved(p: &Path) -> PathBuf {
    p.canonicalize().or_else(|_| std::path::absolute(p)).unwrap_or_else(|_| p.to_path_buf())
}

pub fn ensure_distinct(data: &Path, out: &Path) -> Result<()> {
    if resolved(data) == resolved(out) {
        return Err(usage("--out must differ from --data".to_string()));
    }
    Ok(())
}

/// Parses `START:END` (half-open; either side may be omitted).
pub fn parse_frame_range(s: &str) -> Result<Range<u32>, String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let start = if a.is_empty() { 0 } else { a.parse().map_err(|e| format!("{a}: {e}"))? };
    let end = if b.is_empty() { u32::MAX } else { b.parse().map_err(|e| format!("{b}: {e}"))? };
    if start > end {
        return Err(format!("empty range {s}"));
    }
    Ok(start..end)
}

/// Parses `SEQ:FRAME`.
pub fn parse_frame_key(s: &str) -> Result<FrameKey, String> {
    let (a, b) = s.split_once(':').ok_or("expected SEQ:FRAME")?;
    Ok(FrameKey::new(
        a.parse().map_err(|e| format!("{a}: {e}"))?,
        b.parse().map_err(|e| format!("{b}: {e}"))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(root: &Path, seq: &str, frames: u32, labels: bool) {
        let base = root.join("sequences").join(seq);
        fs::create_dir_all(base.join("velodyne")).unwrap();
        if labels {
            fs::create_dir_all(base.join("labels")).unwrap();
        }
        for f in 0..frames {
            fs::write(base.join("velodyne").join(format!("{f:06}.bin")), []).unwrap();
        }
    }

    #[test]
    fn stride_over_thousand_frames() {
        let dir = tempfile::tempdir().unwrap();
        layout(dir.path(), "00", 1000, true);
        let sel = Selection { stride: 100, ..Selection::default() };
        let frames = select(dir.path(), &sel, true).unwrap();
        assert_eq!(frames.len(), 10);
        assert_eq!(frames[1].key, FrameKey::new(0, 100));
    }

    #[test]
    fn ranges_sequences_and_missing_labels() {
        let dir = tempfile::tempdir().unwrap();
        layout(dir.path(), "00", 5, true);
        layout(dir.path(), "03", 5, false);
        let sel = Selection { sequences: vec![3, 0], frames: Some(1..3), stride: 1 };
        let frames = select(dir.path(), &sel, false).unwrap();
        let keys: Vec<_> = frames.iter().map(|f| (f.key.sequence, f.key.frame)).collect();
        assert_eq!(keys, [(0, 1), (0, 2), (3, 1), (3, 2)]);
        assert!(frames[2].labels.is_none());
        assert!(select(dir.path(), &sel, true).is_err());
        let missing = Selection { sequences: vec![7], stride: 1, ..Selection::default() };
        assert!(select(dir.path(), &missing, false).is_err());
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_frame_range("10:20").unwrap(), 10..20);
        assert_eq!(parse_frame_range(":5").unwrap(), 0..5);
        assert!(parse_frame_range("5").is_err());
        assert_eq!(parse_frame_key("8:42").unwrap(), FrameKey::new(8, 42));
    }

    #[test]
    fn same_root_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(ensure_distinct(dir.path(), &dir.path().join(".")).is_err());
        assert!(ensure_distinct(dir.path(), &dir.path().join("out")).is_ok());
    }
}
