use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub intensity: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T, z: T, intensity: T) -> Self {
        Self { x, y, z, intensity }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn range(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn cast<U: Scalar>(&self) -> Point<U> {
        Point {
            x: U::from_f64_lossy(self.x.to_f64_lossless()),
            y: U::from_f64_lossy(self.y.to_f64_lossless()),
            z: U::from_f64_lossy(self.z.to_f64_lossless()),
            intensity: U::from_f64_lossy(self.intensity.to_f64_lossless()),
        }
    }

    /// Bitwise equality, distinguishing `-0.0` and NaN payloads.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.x.to_bits_u64() == other.x.to_bits_u64()
            && self.y.to_bits_u64() == other.y.to_bits_u64()
            && self.z.to_bits_u64() == other.z.to_bits_u64()
            && self.intensity.to_bits_u64() == other.intensity.to_bits_u64()
    }
}

/// Semantic class and instance id of one point, packed in the dataset as a
/// single 32-bit word: semantic class in the low 16 bits, instance in the high 16.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabelRecord {
    pub semantic_class: u16,
    pub instance_id: u16,
}

impl LabelRecord {
    pub const fn new(semantic_class: u16, instance_id: u16) -> Self {
        Self {
            semantic_class,
            instance_id,
        }
    }

    #[inline]
    pub const fn from_word(word: u32) -> Self {
        Self {
            semantic_class: (word & 0xFFFF) as u16,
            instance_id: (word >> 16) as u16,
        }
    }

    #[inline]
    pub const fn to_word(self) -> u32 {
        (self.instance_id as u32) << 16 | self.semantic_class as u32
    }
}

/// Identifies a frame within a dataset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrameKey {
    pub sequence: u32,
    pub frame: u32,
}

impl FrameKey {
    pub const fn new(sequence: u32, frame: u32) -> Self {
        Self { sequence, frame }
    }
}

impl std::fmt::Display for FrameKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:02}/{:06}", self.sequence, self.frame)
    }
}

/// Ordered points with optional parallel labels. Order is significant.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Point<T>>,
    labels: Option<Vec<LabelRecord>>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(points: Vec<Point<T>>) -> Self {
        Self {
            points,
            labels: None,
        }
    }

    pub fn with_labels(points: Vec<Point<T>>, labels: Vec<LabelRecord>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch {
                points: points.len(),
                labels: labels.len(),
            });
        }
        Ok(Self {
            points,
            labels: Some(labels),
        })
    }

    pub fn empty_like(&self) -> Self {
        Self {
            points: Vec::new(),
            labels: self.labels.as_ref().map(|_| Vec::new()),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    #[inline]
    pub fn labels(&self) -> Option<&[LabelRecord]> {
        self.labels.as_deref()
    }

    pub fn has_labels(&self) -> bool {
        self.labels.is_some()
    }

    pub fn into_parts(self) -> (Vec<Point<T>>, Option<Vec<LabelRecord>>) {
        (self.points, self.labels)
    }

    /// Applies `f` to every finite point; non-finite points are left untouched.
    pub fn map_finite(&self, mut f: impl FnMut(&Point<T>) -> Point<T>) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| if p.is_finite() { f(p) } else { *p })
            .collect();
        Self {
            points,
            labels: self.labels.clone(),
        }
    }

    /// Keeps points whose mask entry is `true`; labels follow in lockstep.
    pub fn filter(&self, keep: &[bool]) -> Self {
        debug_assert_eq!(keep.len(), self.len());
        let points = self
            .points
            .iter()
            .zip(keep)
            .filter_map(|(p, &k)| k.then_some(*p))
            .collect();
        let labels = self.labels.as_ref().map(|labels| {
            labels
                .iter()
                .zip(keep)
                .filter_map(|(l, &k)| k.then_some(*l))
                .collect()
        });
        Self { points, labels }
    }

    /// Appends points. When `self` is labeled, `labels` must be supplied with matching length.
    pub fn push_points(&mut self, points: &[Point<T>], labels: Option<&[LabelRecord]>) -> Result<()> {
        match (&mut self.labels, labels) {
            (Some(own), Some(extra)) => {
                if extra.len() != points.len() {
                    return Err(Error::LengthMismatch {
                        points: points.len(),
                        labels: extra.len(),
                    });
                }
                own.extend_from_slice(extra);
            }
            (Some(_), None) => return Err(Error::MissingLabels),
            (None, _) => {}
        }
        self.points.extend_from_slice(points);
        Ok(())
    }

    pub fn max_instance_id(&self) -> u16 {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().map(|r| r.instance_id).max())
            .unwrap_or(0)
    }

    pub fn cast<U: Scalar>(&self) -> PointCloud<U> {
        PointCloud {
            points: self.points.iter().map(Point::cast).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Bitwise equality of points and labels.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self.labels == other.labels
            && self.points.iter().zip(&other.points).all(|(a, b)| a.bit_eq(b))
    }
}

impl<T: Scalar> FromIterator<Point<T>> for PointCloud<T> {
    fn from_iter<I: IntoIterator<Item = Point<T>>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}
