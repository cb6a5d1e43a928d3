//! Descending-power successive interference cancellation for one slot.
//!
//! The receiver starts at the strongest level and works down. Inside a level
//! group of `k` simultaneous transmitters the signals are decoded one after
//! another; position `i` still sees the `k - i` not-yet-decoded signals of its
//! own level plus everything transmitted at weaker levels. The first failure
//! stops decoding: every later position and every weaker level is lost.
//!
//! Positions are abstract here. Which device lands in which position is a
//! random permutation drawn by the caller.

use crate::error::{Error, Result};
use crate::power::{meets_threshold, PowerLevelSet};

/// SINR of position `position` (1-based) in a group of `group_size` devices at
/// level `level` (1-based), given the multiplicities of all weaker levels.
pub fn sinr_at_position(
    level: usize,
    position: usize,
    group_size: usize,
    set: &PowerLevelSet,
    lower_counts: &[usize],
) -> Result<f64> {
    if level == 0 || level > set.len() {
        return Err(Error::OutOfRange(format!(
            "level {level} not in 1..={}",
            set.len()
        )));
    }
    if position == 0 || position > group_size {
        return Err(Error::OutOfRange(format!(
            "position {position} not in 1..={group_size}"
        )));
    }
    if lower_counts.len() > level - 1 {
        return Err(Error::DimensionMismatch {
            what: "lower-level counts",
            expected: level - 1,
            got: lower_counts.len(),
        });
    }
    let levels = set.levels();
    let weaker: f64 = lower_counts
        .iter()
        .zip(levels)
        .map(|(&c, &v)| v * c as f64)
        .sum();
    Ok(sinr(
        levels[level - 1],
        position,
        group_size,
        weaker,
        set.noise(),
    ))
}

#[inline]
fn sinr(v: f64, position: usize, group_size: usize, weaker: f64, noise: f64) -> f64 {
    v / (v * (group_size - position) as f64 + weaker + noise)
}

/// Per-level multiplicities of one slot's transmissions (index 0 is level 1).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SlotTransmissions {
    pub counts: Vec<usize>,
}

impl SlotTransmissions {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupStatus {
    Decoded,
    Failed,
}

/// Outcome for one level group. `throughputs[i]` belongs to position `i + 1`
/// and is zero for every position of a failed group.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelOutcome {
    pub status: GroupStatus,
    pub throughputs: Vec<f64>,
}

impl LevelOutcome {
    pub fn is_decoded(&self) -> bool {
        self.status == GroupStatus::Decoded
    }

    /// Mean throughput over the group's positions (0 for an empty group).
    pub fn mean_throughput(&self) -> f64 {
        if self.throughputs.is_empty() {
            0.0
        } else {
            self.throughputs.iter().sum::<f64>() / self.throughputs.len() as f64
        }
    }
}

/// Per-level outcomes; `groups[m]` is level `m + 1`. Empty levels above the
/// first failure are reported as decoded.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotDecodeResult {
    pub groups: Vec<LevelOutcome>,
}

impl SlotDecodeResult {
    pub fn total_throughput(&self) -> f64 {
        self.groups.iter().flat_map(|g| &g.throughputs).sum()
    }

    pub fn decoded_count(&self) -> usize {
        self.groups
            .iter()
            .filter(|g| g.is_decoded())
            .map(|g| g.throughputs.len())
            .sum()
    }
}

/// Decodes one slot. `tx.counts` may be shorter than the level set (missing
/// levels are idle) but not longer.
pub fn decode_slot(tx: &SlotTransmissions, set: &PowerLevelSet) -> Result<SlotDecodeResult> {
    let m = set.len();
    if tx.counts.len() > m {
        return Err(Error::DimensionMismatch {
            what: "slot transmission counts",
            expected: m,
            got: tx.counts.len(),
        });
    }
    let levels = set.levels();
    let count = |idx: usize| tx.counts.get(idx).copied().unwrap_or(0);

    // weaker[idx] = sum over levels below idx of V * count
    let mut weaker = vec![0.0; m];
    for idx in 1..m {
        weaker[idx] = weaker[idx - 1] + levels[idx - 1] * count(idx - 1) as f64;
    }

    let mut groups = vec![
        LevelOutcome {
            status: GroupStatus::Failed,
            throughputs: Vec::new(),
        };
        m
    ];
    let mut failed = false;
    for idx in (0..m).rev() {
        let k = count(idx);
        let group = &mut groups[idx];
        group.throughputs = vec![0.0; k];
        if failed {
            continue;
        }
        for pos in 1..=k {
            let s = sinr(levels[idx], pos, k, weaker[idx], set.noise());
            if !meets_threshold(s, set.gamma()) {
                failed = true;
                break;
            }
            group.throughputs[pos - 1] = (1.0 + s).log2();
        }
        if failed {
            group.throughputs.iter_mut().for_each(|t| *t = 0.0);
        } else {
            group.status = GroupStatus::Decoded;
        }
    }
    Ok(SlotDecodeResult { groups })
}
