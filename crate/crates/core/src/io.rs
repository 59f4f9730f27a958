//! SemanticKITTI scan (`.bin`) and label (`.label`) files.
//!
//! Scans are little-endian `f32 × 4` per point (x, y, z, intensity); labels are
//! one little-endian `u32` per point.

use std::fs;
use std::path::Path;

use log::warn;

use crate::cloud::{LabelRecord, Point, PointCloud};
use crate::error::{Error, Result};

pub const POINT_RECORD_BYTES: usize = 16;
pub const LABEL_RECORD_BYTES: usize = 4;

fn check_len(path: &Path, len: usize, record: usize) -> Result<()> {
    let rem = len % record;
    if rem != 0 {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            offset: (len - rem) as u64,
            len: len as u64,
            record,
        });
    }
    Ok(())
}

pub fn decode_points(path: &Path, bytes: &[u8]) -> Result<Vec<Point<f32>>> {
    check_len(path, bytes.len(), POINT_RECORD_BYTES)?;
    let mut non_finite = 0usize;
    let points: Vec<Point<f32>> = bytes
        .chunks_exact(POINT_RECORD_BYTES)
        .map(|rec| {
            let f = |i: usize| f32::from_le_bytes(rec[i * 4..i * 4 + 4].try_into().unwrap());
            let p = Point::new(f(0), f(1), f(2), f(3));
            if !(p.is_finite() && p.intensity.is_finite()) {
                non_finite += 1;
            }
            p
        })
        .collect();
    if non_finite > 0 {
        warn!("{}: {non_finite} non-finite points retained", path.display());
    }
    Ok(points)
}

pub fn encode_points(points: &[Point<f32>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(points.len() * POINT_RECORD_BYTES);
    for p in points {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_labels(path: &Path, bytes: &[u8]) -> Result<Vec<LabelRecord>> {
    check_len(path, bytes.len(), LABEL_RECORD_BYTES)?;
    Ok(bytes
        .chunks_exact(LABEL_RECORD_BYTES)
        .map(|w| LabelRecord::from_word(u32::from_le_bytes(w.try_into().unwrap())))
        .collect())
}

pub fn encode_labels(labels: &[LabelRecord]) -> Vec<u8> {
    labels.iter().flat_map(|l| l.to_word().to_le_bytes()).collect()
}

/// Reads an unlabeled scan.
pub fn read_points(path: impl AsRef<Path>) -> Result<PointCloud<f32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(PointCloud::new(decode_points(path, &bytes)?))
}

/// Writes the points of `cloud`; labels, if any, are not written.
pub fn write_points(cloud: &PointCloud<f32>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_points(cloud.points())).map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<LabelRecord>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_labels(path, &bytes)
}

pub fn write_labels(labels: &[LabelRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_labels(labels)).map_err(|e| Error::io(path, e))
}

/// Reads a scan with its paired label file.
pub fn read_scan(scan: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<PointCloud<f32>> {
    let (points, _) = read_points(scan)?.into_parts();
    let labels = read_labels(labels)?;
    PointCloud::with_labels(points, labels)
}
