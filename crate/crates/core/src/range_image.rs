//! Per-cell index of a point cloud on the sensor raster.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::scalar::Scalar;
use crate::sensor::{CellIndex, SensorModel};

/// Which parent contributed a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Scene,
    Partner,
    /// Injected instance, numbered in injection order within the frame.
    Instance(u16),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeEntry<T> {
    pub ordinal: u32,
    pub range: T,
    pub source: Source,
}

#[derive(Clone, Debug)]
pub struct RangeImage<T> {
    sensor: SensorModel,
    /// `offsets[c]..offsets[c + 1]` spans the entries of linear cell `c`.
    offsets: Vec<u32>,
    entries: Vec<RangeEntry<T>>,
    out_of_view: Vec<u32>,
}

impl<T: Scalar> RangeImage<T> {
    /// Indexes every point of `cloud`. Non-finite, degenerate and out-of-view points
    /// go to the side list; entries in each cell are ordered by ascending range.
    pub fn build(cloud: &PointCloud<T>, sensor: &SensorModel, source: Source) -> Self {
        let n_cells = sensor.num_cells();
        let mut located = Vec::with_capacity(cloud.len());
        let mut out_of_view = Vec::new();
        let mut counts = vec![0u32; n_cells + 1];

        for (i, p) in cloud.points().iter().enumerate() {
            match sensor.locate(p.x, p.y, p.z) {
                Some((cell, range)) => {
                    let linear = sensor.linear(cell);
                    counts[linear + 1] += 1;
                    located.push((linear as u32, i as u32, range));
                }
                None => out_of_view.push(i as u32),
            }
        }

        for c in 0..n_cells {
            counts[c + 1] += counts[c];
        }
        let offsets = counts;

        let mut cursor: Vec<u32> = offsets[..n_cells].to_vec();
        let mut entries = vec![
            RangeEntry {
                ordinal: 0,
                range: T::zero(),
                source,
            };
            located.len()
        ];
        for (linear, ordinal, range) in located {
            let slot = &mut cursor[linear as usize];
            entries[*slot as usize] = RangeEntry {
                ordinal,
                range,
                source,
            };
            *slot += 1;
        }
        for c in 0..n_cells {
            let (lo, hi) = (offsets[c] as usize, offsets[c + 1] as usize);
            if hi - lo > 1 {
                entries[lo..hi].sort_unstable_by(compare_entries);
            }
        }

        Self {
            sensor: *sensor,
            offsets,
            entries,
            out_of_view,
        }
    }

    pub fn sensor(&self) -> &SensorModel {
        &self.sensor
    }

    #[inline]
    pub fn cell_linear(&self, linear: usize) -> &[RangeEntry<T>] {
        &self.entries[self.offsets[linear] as usize..self.offsets[linear + 1] as usize]
    }

    #[inline]
    pub fn cell(&self, cell: CellIndex) -> &[RangeEntry<T>] {
        self.cell_linear(self.sensor.linear(cell))
    }

    #[inline]
    pub fn min_range(&self, linear: usize) -> Option<T> {
        self.cell_linear(linear).first().map(|e| e.range)
    }

    /// Occupied cells as `(linear index, entries)`, in raster order.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, &[RangeEntry<T>])> + '_ {
        (0..self.sensor.num_cells()).filter_map(move |c| {
            let entries = self.cell_linear(c);
            (!entries.is_empty()).then_some((c, entries))
        })
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn num_occupied(&self) -> usize {
        self.offsets.windows(2).filter(|w| w[1] > w[0]).count()
    }

    /// Ordinals of points that could not be placed on the raster.
    pub fn out_of_view(&self) -> &[u32] {
        &self.out_of_view
    }

    /// Per-cell minimum range, `None` for empty cells; row-major `H × W`.
    pub fn min_range_raster(&self) -> Vec<Option<T>> {
        (0..self.sensor.num_cells()).map(|c| self.min_range(c)).collect()
    }
}

fn compare_entries<T: Scalar>(a: &RangeEntry<T>, b: &RangeEntry<T>) -> Ordering {
    a.range
        .partial_cmp(&b.range)
        .unwrap_or(Ordering::Equal)
        .then(a.ordinal.cmp(&b.ordinal))
}
