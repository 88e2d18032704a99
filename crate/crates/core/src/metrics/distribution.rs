use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::reciprocity::{DyadClass, ReciprocityRecord};

pub const DEFAULT_BIN_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: u64,
}

/// Fixed-width histogram of reciprocity scores starting at 0, plus class
/// tallies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReciprocityHistogram {
    pub bin_width: f64,
    pub bins: Vec<HistogramBin>,
    /// Counts in [`DyadClass::ALL`] order.
    pub class_counts: [u64; 3],
    pub total: u64,
}

impl ReciprocityHistogram {
    /// Class shares in [`DyadClass::ALL`] order; all zero when empty.
    pub fn class_proportions(&self) -> [f64; 3] {
        if self.total == 0 {
            return [0.0; 3];
        }
        self.class_counts.map(|c| c as f64 / self.total as f64)
    }

    pub fn class_share(&self, class: DyadClass) -> f64 {
        self.class_proportions()[class.index()]
    }
}

pub fn reciprocity_distribution<'a, I>(records: I, bin_width: f64) -> Result<ReciprocityHistogram>
where
    I: IntoIterator<Item = &'a ReciprocityRecord>,
{
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::Domain(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let mut counts: Vec<u64> = Vec::new();
    let mut class_counts = [0u64; 3];
    let mut total = 0u64;
    for rec in records {
        let idx = (rec.r_value / bin_width).floor() as usize;
        if idx >= counts.len() {
            counts.resize(idx + 1, 0);
        }
        counts[idx] += 1;
        class_counts[rec.class.index()] += 1;
        total += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            low: i as f64 * bin_width,
            high: (i + 1) as f64 * bin_width,
            count,
        })
        .collect();
    Ok(ReciprocityHistogram {
        bin_width,
        bins,
        class_counts,
        total,
    })
}
