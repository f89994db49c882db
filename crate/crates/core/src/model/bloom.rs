use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use super::{ModelError, Pathway};

/// Bloom level names, index 0 is level 1.
pub const BLOOM_VERBS: [&str; 6] = [
    "Remember",
    "Understand",
    "Apply",
    "Analyze",
    "Evaluate",
    "Create",
];

/// Contiguous set of Bloom levels admitted in a week.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BloomRange {
    pub low: u8,
    pub high: u8,
}

impl BloomRange {
    pub fn contains(&self, level: u8) -> bool {
        (self.low..=self.high).contains(&level)
    }

    pub fn levels(&self) -> BTreeSet<u8> {
        self.as_range().collect()
    }

    pub fn as_range(&self) -> RangeInclusive<u8> {
        self.low..=self.high
    }
}

/// Admissible Bloom levels for a 1-based week index.
///
/// Weeks 1 to 3 overlap by one level with their neighbours; every week from
/// the fourth on admits Analyze through Create.
pub fn bloom_range_for_week(week_index: i64) -> Result<BloomRange, ModelError> {
    let (low, high) = match week_index {
        i64::MIN..=0 => return Err(ModelError::InvalidWeek(week_index)),
        1 => (1, 2),
        2 => (2, 3),
        3 => (3, 4),
        _ => (4, 6),
    };
    Ok(BloomRange { low, high })
}

/// Bloom level of every video in week order, then slot order.
pub fn flatten_bloom(pathway: &Pathway) -> Vec<u8> {
    pathway
        .weeks
        .iter()
        .flat_map(|w| w.videos.iter().map(|v| v.bloom_level))
        .collect()
}
