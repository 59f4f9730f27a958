use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::Result;
use lidar_forge::classes;
use lidar_forge::io::read_labels;
use rayon::prelude::*;

use crate::dataset::FrameRef;

pub const CSV_FILE: &str = "class_stats.csv";

#[derive(Clone, Debug, PartialEq)]
pub struct ClassRow {
    pub class_id: u16,
    pub name: &'static str,
    pub points: u64,
    pub share: f64,
    /// Frames containing at least one point of the class.
    pub frames: u64,
}

pub fn collect(frames: &[FrameRef]) -> Result<Vec<ClassRow>> {
    let per_frame: Vec<BTreeMap<u16, u64>> = frames
        .par_iter()
        .map(|f| -> Result<_> {
            let path = f.labels.as_ref().expect("stats requires labels");
            let mut counts = BTreeMap::new();
            for l in read_labels(path)? {
                *counts.entry(l.semantic_class).or_insert(0) += 1;
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;

    let mut totals: BTreeMap<u16, (u64, u64)> = BTreeMap::new();
    for counts in &per_frame {
        for (&c, &n) in counts {
            let t = totals.entry(c).or_default();
            t.0 += n;
            t.1 += 1;
        }
    }
    let total: u64 = totals.values().map(|t| t.0).sum();
    Ok(totals
        .into_iter()
        .map(|(class_id, (points, frames))| ClassRow {
            class_id,
            name: classes::name(class_id),
            points,
            share: points as f64 / total as f64,
            frames,
        })
        .collect())
}

pub fn table(rows: &[ClassRow], frames: usize) -> String {
    let mut s = String::new();
    writeln!(s, "{:>5}  {:<20} {:>12} {:>10} {:>8}", "class", "name", "points", "share", "frames").unwrap();
    for r in rows {
        writeln!(
            s,
            "{:>5}  {:<20} {:>12} {:>9.4}% {:>8}",
            r.class_id,
            r.name,
            r.points,
            100.0 * r.share,
            r.frames
        )
        .unwrap();
    }
    let total: u64 = rows.iter().map(|r| r.points).sum();
    writeln!(s, "{} points in {} frames", total, frames).unwrap();
    s
}

pub fn csv_bytes(rows: &[ClassRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["class_id", "name", "points", "share", "frames"])?;
    for r in rows {
        w.write_record([
            r.class_id.to_string(),
            r.name.to_string(),
            r.points.to_string(),
            r.share.to_string(),
            r.frames.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lidar_forge::{compute_distribution, LabelRecord};
    use lidar_forge::io::write_labels;

    #[test]
    fn single_frame_matches_distribution() {
        let dir = tempfile::tempdir().unwrap();
        let labels: Vec<LabelRecord> = (0..1000u32).map(|i| LabelRecord::new([10, 40, 40, 30][i as usize % 4], 0)).collect();
        let path = dir.path().join("000000.label");
        write_labels(&labels, &path).unwrap();
        let f = FrameRef {
            key: Default::default(),
            sequence_dir: "00".into(),
            stem: "000000".into(),
            scan: dir.path().join("000000.bin"),
            labels: Some(path),
        };
        let rows = collect(&[f]).unwrap();
        let dist = compute_distribution(&labels).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert_eq!(r.points, dist.count(r.class_id) as u64);
            assert_eq!(r.share, dist.share(r.class_id));
            assert_eq!(r.frames, 1);
        }
    }

    #[test]
    fn empty_selection_has_header_only() {
        let rows = collect(&[]).unwrap();
        assert!(rows.is_empty());
        assert_eq!(String::from_utf8(csv_bytes(&rows).unwrap()).unwrap(), "class_id,name,points,share,frames\n");
    }
}
