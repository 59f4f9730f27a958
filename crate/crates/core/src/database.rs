//! Rare-class object instances extracted from labeled frames, and their on-disk database.
//!
//! File layout (all little-endian):
//!
//! ```text
//! header   56 B   magic "LFINSTDB", version u32, H u32, W u32, reserved u32,
//!                 fov_up f64, fov_down f64, fingerprint u64, class count u32, instance count u32
//! classes   8 B   per class: class id u32, instance count u32   (ascending class id)
//! records         per instance, grouped by class in table order:
//!          20 B   class u16, group u16, instance id u16, reserved u16, sequence u32, frame u32, point count u32
//!          20 B   per point: x, y, z, intensity f32, row u16, col u16
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classes;
use crate::cloud::{FrameKey, Point, PointCloud};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sensor::SensorModel;

pub const MAGIC: [u8; 8] = *b"LFINSTDB";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_BYTES: usize = 56;
pub const CLASS_ENTRY_BYTES: usize = 8;
pub const RECORD_HEADER_BYTES: usize = 20;
pub const POINT_BYTES: usize = 20;

/// Linkage distance for grouping points of a target class that carry no instance id.
pub const LINKAGE_DISTANCE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstancePoint<T> {
    pub point: Point<T>,
    pub row: u16,
    pub col: u16,
}

/// Where an instance was extracted from. `group` is 0 for labeled instances and
/// numbers the connected components of points without an instance id.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SourceRef {
    pub sequence: u32,
    pub frame: u32,
    pub instance_id: u16,
    pub group: u16,
}

impl SourceRef {
    pub fn frame_key(&self) -> FrameKey {
        FrameKey::new(self.sequence, self.frame)
    }
}

/// One extracted object, in the original sensor frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectInstance<T> {
    pub semantic_class: u16,
    pub points: Vec<InstancePoint<T>>,
    pub source: SourceRef,
}

impl<T: Scalar> ObjectInstance<T> {
    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn cast<U: Scalar>(&self) -> ObjectInstance<U> {
        ObjectInstance {
            semantic_class: self.semantic_class,
            points: self
                .points
                .iter()
                .map(|p| InstancePoint {
                    point: p.point.cast(),
                    row: p.row,
                    col: p.col,
                })
                .collect(),
            source: self.source,
        }
    }

    pub fn to_cloud(&self) -> PointCloud<T> {
        PointCloud::new(self.points.iter().map(|p| p.point).collect())
    }
}

/// Groups the labeled points of `cloud` into instances of `classes`.
///
/// Points are grouped by `(semantic class, instance id)`. Points of a target class
/// with instance id 0 are split into connected components under 0.5 m single linkage.
/// Groups below `min_points` are discarded, as are ground and other non-object classes.
/// Only points that project onto the raster are kept, each with its `(row, col)`.
pub fn extract_instances<T: Scalar>(
    cloud: &PointCloud<T>,
    classes: &[u16],
    min_points: usize,
    sensor: &SensorModel,
    frame: FrameKey,
) -> Result<Vec<ObjectInstance<T>>> {
    let labels = cloud.labels().ok_or(Error::MissingLabels)?;
    let wanted: Vec<u16> = classes.iter().copied().filter(|&c| classes::is_thing(c)).collect();

    let mut groups: BTreeMap<(u16, u16), Vec<InstancePoint<T>>> = BTreeMap::new();
    for (p, l) in cloud.points().iter().zip(labels) {
        if !wanted.contains(&l.semantic_class) {
            continue;
        }
        if let Some((cell, _)) = sensor.locate(p.x, p.y, p.z) {
            groups
                .entry((l.instance_id, l.semantic_class))
                .or_default()
                .push(InstancePoint {
                    point: *p,
                    row: cell.row as u16,
                    col: cell.col as u16,
                });
        }
    }

    let mut out = Vec::new();
    for ((instance_id, semantic_class), points) in groups {
        let source = |group: u16| SourceRef {
            sequence: frame.sequence,
            frame: frame.frame,
            instance_id,
            group,
        };
        if instance_id == 0 {
            for (i, component) in linkage_components(&points, LINKAGE_DISTANCE).into_iter().enumerate() {
                if component.len() >= min_points {
                    out.push(ObjectInstance {
                        semantic_class,
                        points: component.into_iter().map(|j| points[j]).collect(),
                        source: source(i as u16 + 1),
                    });
                }
            }
        } else if points.len() >= min_points {
            out.push(ObjectInstance {
                semantic_class,
                points,
                source: source(0),
            });
        }
    }
    Ok(out)
}

/// Single-linkage connected components; each component lists point indices in ascending order,
/// and components are ordered by their first index.
fn linkage_components<T: Scalar>(points: &[InstancePoint<T>], distance: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    let pos = |i: usize| {
        let p = &points[i].point;
        [p.x.to_f64_lossless(), p.y.to_f64_lossless(), p.z.to_f64_lossless()]
    };
    let voxel = |v: [f64; 3]| {
        [
            (v[0] / distance).floor() as i64,
            (v[1] / distance).floor() as i64,
            (v[2] / distance).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for i in 0..n {
        grid.entry(voxel(pos(i))).or_default().push(i);
    }

    let d2 = distance * distance;
    for i in 0..n {
        let pi = pos(i);
        let [vx, vy, vz] = voxel(pi);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(cands) = grid.get(&[vx + dx, vy + dy, vz + dz]) else {
                        continue;
                    };
                    for &j in cands {
                        if j <= i {
                            continue;
                        }
                        let pj = pos(j);
                        let dist2 = (pi[0] - pj[0]).powi(2) + (pi[1] - pj[1]).powi(2) + (pi[2] - pj[2]).powi(2);
                        if dist2 <= d2 {
                            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                            if a != b {
                                parent[a.max(b)] = a.min(b);
                            }
                        }
                    }
                }
            }
        }
    }

    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        by_root.entry(r).or_default().push(i);
    }
    // Roots are the minimum index of each component, so BTreeMap order is first-index order.
    by_root.into_values().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatabaseConfig {
    pub sensor: SensorModel,
    pub classes: Vec<u16>,
    pub min_points: usize,
}

impl Default for DatabaseConfig {
    fn default() -> Self {
        Self {
            sensor: SensorModel::default(),
            classes: classes::default_injection_classes(),
            min_points: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameError {
    pub frame: FrameKey,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub fingerprint: u64,
    pub counts: BTreeMap<u16, usize>,
    pub total: usize,
    pub frames_scanned: usize,
    pub errors: Vec<FrameError>,
}

/// Class-indexed store of object instances. Immutable once built or loaded.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceDatabase {
    sensor: SensorModel,
    classes: BTreeMap<u16, Vec<ObjectInstance<f32>>>,
    fingerprint: u64,
    frames_scanned: usize,
    errors: Vec<FrameError>,
}

/// A frame to read from disk for [`build_database`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameFiles {
    pub key: FrameKey,
    pub scan: PathBuf,
    pub labels: PathBuf,
}

/// Hash of the ordered frame list a database was built from.
pub fn fingerprint(frames: &[FrameKey]) -> u64 {
    let mut h = Sha256::new();
    for k in frames {
        h.update(k.sequence.to_le_bytes());
        h.update(k.frame.to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

impl InstanceDatabase {
    pub fn empty(sensor: SensorModel, classes: &[u16]) -> Self {
        Self {
            sensor,
            classes: classes.iter().map(|&c| (c, Vec::new())).collect(),
            fingerprint: fingerprint(&[]),
            frames_scanned: 0,
            errors: Vec::new(),
        }
    }

    /// Builds a database from frames supplied by `load`. Frames are processed in
    /// `(sequence, frame)` order; a frame that fails to load is recorded and skipped.
    pub fn build_with<F>(keys: &[FrameKey], config: &DatabaseConfig, mut load: F) -> Result<Self>
    where
        F: FnMut(&FrameKey) -> Result<PointCloud<f32>>,
    {
        config.sensor.validate()?;
        let mut keys = keys.to_vec();
        keys.sort();
        keys.dedup();

        let mut db = Self::empty(config.sensor, &config.classes);
        db.fingerprint = fingerprint(&keys);
        for key in &keys {
            db.frames_scanned += 1;
            let extracted = load(key).and_then(|cloud| {
                extract_instances(&cloud, &config.classes, config.min_points, &config.sensor, *key)
            });
            match extracted {
                Ok(instances) => {
                    for inst in instances {
                        db.classes.entry(inst.semantic_class).or_default().push(inst);
                    }
                }
                Err(e) => db.errors.push(FrameError {
                    frame: *key,
                    message: e.to_string(),
                }),
            }
        }
        Ok(db)
    }

    pub fn sensor(&self) -> &SensorModel {
        &self.sensor
    }

    pub fn classes(&self) -> impl Iterator<Item = u16> + '_ {
        self.classes.keys().copied()
    }

    pub fn instances(&self, class: u16) -> Result<&[ObjectInstance<f32>]> {
        self.classes
            .get(&class)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownClass(class))
    }

    pub fn get(&self, class: u16, ordinal: usize) -> Option<&ObjectInstance<f32>> {
        self.classes.get(&class)?.get(ordinal)
    }

    pub fn count(&self, class: u16) -> usize {
        self.classes.get(&class).map_or(0, Vec::len)
    }

    pub fn total(&self) -> usize {
        self.classes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn errors(&self) -> &[FrameError] {
        &self.errors
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            format_version: FORMAT_VERSION,
            fingerprint: self.fingerprint,
            counts: self.classes.iter().map(|(&c, v)| (c, v.len())).collect(),
            total: self.total(),
            frames_scanned: self.frames_scanned,
            errors: self.errors.clone(),
        }
    }

    /// Uniform draw over the instances of `class`; `Ok(None)` when the class has none.
    pub fn sample<R: Rng + ?Sized>(&self, class: u16, rng: &mut R) -> Result<Option<&ObjectInstance<f32>>> {
        let list = self.instances(class)?;
        if list.is_empty() {
            return Ok(None);
        }
        Ok(Some(&list[rng.random_range(0..list.len())]))
    }

    /// Serialized size in bytes.
    pub fn encoded_len(&self) -> usize {
        HEADER_BYTES
            + CLASS_ENTRY_BYTES * self.classes.len()
            + self
                .classes
                .values()
                .flatten()
                .map(|i| RECORD_HEADER_BYTES + POINT_BYTES * i.points.len())
                .sum::<usize>()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.sensor.num_beams as u32).to_le_bytes());
        out.extend_from_slice(&(self.sensor.num_columns as u32).to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        out.extend_from_slice(&self.sensor.fov_up.to_le_bytes());
        out.extend_from_slice(&self.sensor.fov_down.to_le_bytes());
        out.extend_from_slice(&self.fingerprint.to_le_bytes());
        out.extend_from_slice(&(self.classes.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.total() as u32).to_le_bytes());

        for (&class, list) in &self.classes {
            out.extend_from_slice(&(class as u32).to_le_bytes());
            out.extend_from_slice(&(list.len() as u32).to_le_bytes());
        }
        for inst in self.classes.values().flatten() {
            out.extend_from_slice(&inst.semantic_class.to_le_bytes());
            out.extend_from_slice(&inst.source.group.to_le_bytes());
            out.extend_from_slice(&inst.source.instance_id.to_le_bytes());
            out.extend_from_slice(&0u16.to_le_bytes());
            out.extend_from_slice(&inst.source.sequence.to_le_bytes());
            out.extend_from_slice(&inst.source.frame.to_le_bytes());
            out.extend_from_slice(&(inst.points.len() as u32).to_le_bytes());
            for p in &inst.points {
                for v in [p.point.x, p.point.y, p.point.z, p.point.intensity] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                out.extend_from_slice(&p.row.to_le_bytes());
                out.extend_from_slice(&p.col.to_le_bytes());
            }
        }
        debug_assert_eq!(out.len(), self.encoded_len());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let corrupt = |record: usize, message: &str| Error::CorruptDatabase {
            record,
            message: message.to_string(),
        };

        let magic = r.take(8).ok_or_else(|| corrupt(0, "file shorter than header"))?;
        if magic != MAGIC {
            return Err(corrupt(0, "bad magic"));
        }
        let version = r.u32().ok_or_else(|| corrupt(0, "file shorter than header"))?;
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let header = (|| {
            let h = r.u32()? as usize;
            let w = r.u32()? as usize;
            r.u32()?;
            let fov_up = r.f64()?;
            let fov_down = r.f64()?;
            let fp = r.u64()?;
            let n_classes = r.u32()? as usize;
            let n_instances = r.u32()? as usize;
            Some((h, w, fov_up, fov_down, fp, n_classes, n_instances))
        })();
        let (h, w, fov_up, fov_down, fp, n_classes, n_instances) =
            header.ok_or_else(|| corrupt(0, "file shorter than header"))?;
        let sensor = SensorModel::new(h, w, fov_up, fov_down).map_err(|e| corrupt(0, &e.to_string()))?;

        let mut table = Vec::with_capacity(n_classes.min(1 << 16));
        for _ in 0..n_classes {
            let class = r.u32().ok_or_else(|| corrupt(0, "truncated class table"))?;
            let count = r.u32().ok_or_else(|| corrupt(0, "truncated class table"))? as usize;
            let class = u16::try_from(class).map_err(|_| corrupt(0, "class id out of range"))?;
            table.push((class, count));
        }
        if table.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(corrupt(0, "class table not strictly ascending"));
        }
        if table.iter().map(|t| t.1).sum::<usize>() != n_instances {
            return Err(corrupt(0, "class table counts disagree with header"));
        }

        let mut classes = BTreeMap::new();
        let mut ordinal = 0usize;
        for (class, count) in table {
            let mut list = Vec::with_capacity(count.min(1 << 16));
            for _ in 0..count {
                let inst = read_record(&mut r).ok_or_else(|| corrupt(ordinal, "truncated record"))?;
                if inst.semantic_class != class {
                    return Err(corrupt(ordinal, "record class disagrees with class table"));
                }
                if inst.points.iter().any(|p| p.row as usize >= h || p.col as usize >= w) {
                    return Err(corrupt(ordinal, "point cell outside the raster"));
                }
                list.push(inst);
                ordinal += 1;
            }
            classes.insert(class, list);
        }
        if r.pos != bytes.len() {
            return Err(corrupt(ordinal, "trailing bytes after last record"));
        }

        Ok(Self {
            sensor,
            classes,
            fingerprint: fp,
            frames_scanned: 0,
            errors: Vec::new(),
        })
    }
}

fn read_record(r: &mut Reader<'_>) -> Option<ObjectInstance<f32>> {
    let semantic_class = r.u16()?;
    let group = r.u16()?;
    let instance_id = r.u16()?;
    r.u16()?;
    let sequence = r.u32()?;
    let frame = r.u32()?;
    let n = r.u32()? as usize;
    if r.remaining() < n.checked_mul(POINT_BYTES)? {
        return None;
    }
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let point = Point::new(r.f32()?, r.f32()?, r.f32()?, r.f32()?);
        points.push(InstancePoint {
            point,
            row: r.u16()?,
            col: r.u16()?,
        });
    }
    Some(ObjectInstance {
        semantic_class,
        points,
        source: SourceRef {
            sequence,
            frame,
            instance_id,
            group,
        },
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(s)
    }

    fn u16(&mut self) -> Option<u16> {
        Some(u16::from_le_bytes(self.take(2)?.try_into().ok()?))
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }

    fn f32(&mut self) -> Option<f32> {
        Some(f32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}

/// Reads each frame's `.bin`/`.label` pair and builds the database.
pub fn build_database(frames: &[FrameFiles], config: &DatabaseConfig) -> Result<InstanceDatabase> {
    let by_key: BTreeMap<FrameKey, &FrameFiles> = frames.iter().map(|f| (f.key, f)).collect();
    let keys: Vec<FrameKey> = by_key.keys().copied().collect();
    InstanceDatabase::build_with(&keys, config, |key| {
        let files = by_key[key];
        crate::io::read_scan(&files.scan, &files.labels)
    })
}

pub fn save_database(db: &InstanceDatabase, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, db.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_database(path: impl AsRef<Path>) -> Result<InstanceDatabase> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    InstanceDatabase::from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{BICYCLE, CAR, PERSON, ROAD};
    use crate::cloud::LabelRecord;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// A compact blob of `n` points around `(x, y)` at ground level, all in view.
    fn blob(x: f32, y: f32, n: usize) -> Vec<Point<f32>> {
        (0..n)
            .map(|i| {
                let a = i as f32 * 0.01;
                Point::new(x + 0.2 * a.cos(), y + 0.2 * a.sin(), -0.5 + 0.001 * i as f32, 0.5)
            })
            .collect()
    }

    fn labeled(parts: &[(Vec<Point<f32>>, LabelRecord)]) -> PointCloud<f32> {
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (p, l) in parts {
            pts.extend_from_slice(p);
            labels.extend(std::iter::repeat_n(*l, p.len()));
        }
        PointCloud::with_labels(pts, labels).unwrap()
    }

    #[test]
    fn single_person_instance() {
        let cloud = labeled(&[
            (blob(10.0, 0.0, 200), LabelRecord::new(PERSON, 7)),
            (blob(20.0, 5.0, 300), LabelRecord::new(ROAD, 0)),
        ]);
        let s = SensorModel::default();
        let out = extract_instances(&cloud, &[PERSON], 20, &s, FrameKey::new(0, 0)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].point_count(), 200);
        assert_eq!(out[0].source.instance_id, 7);
        for p in &out[0].points {
            let (cell, _) = s.locate(p.point.x, p.point.y, p.point.z).unwrap();
            assert_eq!((cell.row as u16, cell.col as u16), (p.row, p.col));
        }

        assert!(extract_instances(&cloud, &[PERSON], 500, &s, FrameKey::new(0, 0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn ground_classes_never_extracted() {
        let cloud = labeled(&[(blob(10.0, 0.0, 200), LabelRecord::new(ROAD, 3))]);
        let out = extract_instances(&cloud, &[ROAD, PERSON], 1, &SensorModel::default(), FrameKey::default()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn unlabeled_instances_split_by_linkage() {
        let cloud = labeled(&[
            (blob(10.0, 0.0, 50), LabelRecord::new(BICYCLE, 0)),
            (blob(10.0, 8.0, 60), LabelRecord::new(BICYCLE, 0)),
            (blob(10.0, 8.3, 5), LabelRecord::new(BICYCLE, 0)),
        ]);
        let out = extract_instances(&cloud, &[BICYCLE], 20, &SensorModel::default(), FrameKey::default()).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].point_count(), 50);
        // The 5-point blob within 0.5 m joins the second component.
        assert_eq!(out[1].point_count(), 65);
        assert_eq!((out[0].source.group, out[1].source.group), (1, 2));
    }

    #[test]
    fn missing_labels_is_error() {
        let cloud = PointCloud::new(blob(5.0, 0.0, 10));
        assert!(matches!(
            extract_instances(&cloud, &[PERSON], 1, &SensorModel::default(), FrameKey::default()),
            Err(Error::MissingLabels)
        ));
    }

    fn three_instance_db() -> InstanceDatabase {
        let cloud = labeled(&[
            (blob(10.0, 0.0, 30), LabelRecord::new(PERSON, 1)),
            (blob(-10.0, 0.0, 40), LabelRecord::new(PERSON, 2)),
            (blob(0.0, 12.0, 25), LabelRecord::new(BICYCLE, 3)),
            (blob(0.0, -12.0, 90), LabelRecord::new(CAR, 4)),
        ]);
        let config = DatabaseConfig::default();
        InstanceDatabase::build_with(&[FrameKey::new(4, 17)], &config, |_| Ok(cloud.clone())).unwrap()
    }

    #[test]
    fn build_counts_and_round_trip() {
        let db = three_instance_db();
        let m = db.manifest();
        assert_eq!(m.total, 3);
        assert_eq!(m.counts[&PERSON], 2);
        assert_eq!(m.counts[&BICYCLE], 1);
        assert!(!m.counts.contains_key(&CAR));

        let bytes = db.to_bytes();
        assert_eq!(bytes.len(), HEADER_BYTES + 7 * CLASS_ENTRY_BYTES + 3 * RECORD_HEADER_BYTES + 95 * POINT_BYTES);
        let back = InstanceDatabase::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.instances(PERSON).unwrap(), db.instances(PERSON).unwrap());
    }

    #[test]
    fn empty_database_round_trip() {
        let db = InstanceDatabase::build_with(&[], &DatabaseConfig::default(), |_| unreachable!()).unwrap();
        assert!(db.is_empty());
        let back = InstanceDatabase::from_bytes(&db.to_bytes()).unwrap();
        assert_eq!(back.manifest().counts, db.manifest().counts);
        assert_eq!(back.manifest().fingerprint, db.manifest().fingerprint);
    }

    #[test]
    fn unreadable_frame_recorded() {
        let db = InstanceDatabase::build_with(&[FrameKey::new(0, 1)], &DatabaseConfig::default(), |_| {
            Err(Error::MissingLabels)
        })
        .unwrap();
        assert_eq!(db.errors().len(), 1);
        assert_eq!(db.errors()[0].frame, FrameKey::new(0, 1));
    }

    #[test]
    fn version_and_corruption_detected() {
        let db = three_instance_db();
        let mut bytes = db.to_bytes();
        bytes[8] = 9;
        assert!(matches!(
            InstanceDatabase::from_bytes(&bytes),
            Err(Error::VersionMismatch { found: 9, expected: 1 })
        ));

        let bytes = db.to_bytes();
        // Cut inside the last record's point payload.
        let cut = &bytes[..bytes.len() - 7];
        match InstanceDatabase::from_bytes(cut) {
            Err(Error::CorruptDatabase { record, .. }) => assert_eq!(record, 2),
            other => panic!("expected corruption error, got {other:?}"),
        }
        assert!(InstanceDatabase::from_bytes(b"NOTADB").is_err());
    }

    #[test]
    fn sampling_contract() {
        let db = three_instance_db();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let got = db.sample(BICYCLE, &mut rng).unwrap().unwrap();
            assert_eq!(got.source.instance_id, 3);
        }
        assert!(db.sample(crate::classes::MOTORCYCLIST, &mut rng).unwrap().is_none());
        assert!(matches!(db.sample(CAR, &mut rng), Err(Error::UnknownClass(CAR))));
    }
}
