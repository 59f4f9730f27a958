use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cloud::LabelRecord;
use crate::error::{Error, Result};

/// Per-class point counts of one frame.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub counts: BTreeMap<u16, u64>,
    pub total: u64,
}

impl ClassDistribution {
    pub fn count(&self, class: u16) -> u64 {
        self.counts.get(&class).copied().unwrap_or(0)
    }

    pub fn share(&self, class: u16) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(class) as f64 / self.total as f64
        }
    }

    pub fn shares(&self) -> BTreeMap<u16, f64> {
        self.counts.keys().map(|&c| (c, self.share(c))).collect()
    }
}

pub fn compute_distribution(labels: &[LabelRecord]) -> Result<ClassDistribution> {
    if labels.is_empty() {
        return Err(Error::EmptyLabels);
    }
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(l.semantic_class).or_insert(0u64) += 1;
    }
    Ok(ClassDistribution {
        counts,
        total: labels.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_class_even_split() {
        let labels: Vec<_> = (0..10).map(|i| LabelRecord::new(if i % 2 == 0 { 10 } else { 40 }, 0)).collect();
        let d = compute_distribution(&labels).unwrap();
        assert_eq!(d.share(10), 0.5);
        assert_eq!(d.share(40), 0.5);
        assert_eq!(d.shares().values().sum::<f64>(), 1.0);
    }

    #[test]
    fn person_below_threshold() {
        let mut labels = vec![LabelRecord::new(40, 0); 98_500];
        labels.extend(vec![LabelRecord::new(30, 1); 1_500]);
        let d = compute_distribution(&labels).unwrap();
        assert_eq!(d.share(30), 0.015);
        assert!(d.share(30) < 0.02);
        assert_eq!(d.share(11), 0.0);
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(compute_distribution(&[]), Err(Error::EmptyLabels)));
    }
}
