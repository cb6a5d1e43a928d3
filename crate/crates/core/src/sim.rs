//! p-persistent slotted ALOHA with NOMA power levels: population and policy
//! types plus the Monte Carlo epoch runner.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power::PowerLevelSet;
use crate::rewards::{self, RewardKind};
use crate::sic::{decode_slot, SlotTransmissions};

/// Slack allowed on row sums and entry bounds when validating a matrix.
const PROB_TOL: f64 = 1e-9;

/// Lower-triangular matrix of per-type level probabilities.
///
/// Row `n` (0-based) belongs to type `n + 1` and holds `n + 1` entries, the
/// probabilities of transmitting at levels `1..=n+1`. Whatever is left of the
/// row sum is the idle probability. Serializes as a ragged JSON array
/// `[[t11], [t21, t22], ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TransmissionMatrix {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for TransmissionMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<TransmissionMatrix> for Vec<Vec<f64>> {
    fn from(m: TransmissionMatrix) -> Self {
        m.rows
    }
}

impl TransmissionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidMatrix("no rows".into()));
        }
        for (n, row) in rows.iter().enumerate() {
            if row.len() != n + 1 {
                return Err(Error::InvalidMatrix(format!(
                    "row {} must have {} entries, has {}",
                    n + 1,
                    n + 1,
                    row.len()
                )));
            }
            if let Some(bad) = row
                .iter()
                .find(|p| !(p.is_finite() && **p >= -PROB_TOL && **p <= 1.0 + PROB_TOL))
            {
                return Err(Error::InvalidMatrix(format!(
                    "row {} has entry {bad} outside [0, 1]",
                    n + 1
                )));
            }
            let sum: f64 = row.iter().sum();
            if sum > 1.0 + PROB_TOL {
                return Err(Error::InvalidMatrix(format!(
                    "row {} sums to {sum} > 1",
                    n + 1
                )));
            }
        }
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|p| p.clamp(0.0, 1.0)).collect())
            .collect();
        Ok(Self { rows })
    }

    /// Every device always idle.
    pub fn zeros(m: usize) -> Self {
        Self {
            rows: (1..=m).map(|n| vec![0.0; n]).collect(),
        }
    }

    /// Number of types / levels `M`.
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, type_idx: usize) -> &[f64] {
        &self.rows[type_idx]
    }

    /// `tau[type][level]`, both 0-based; zero above the diagonal.
    pub fn get(&self, type_idx: usize, level_idx: usize) -> f64 {
        self.rows[type_idx].get(level_idx).copied().unwrap_or(0.0)
    }

    pub fn transmit_prob(&self, type_idx: usize) -> f64 {
        self.rows[type_idx].iter().sum::<f64>().min(1.0)
    }

    pub fn idle_prob(&self, type_idx: usize) -> f64 {
        1.0 - self.transmit_prob(type_idx)
    }

    /// Entries in row-major order, the order used for lexicographic ties.
    pub fn flat(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }
}

/// Device counts per type; type `n` can reach levels `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DevicePopulation {
    counts: Vec<usize>,
}

impl DevicePopulation {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_types(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// 0-based type index of every device, devices ordered by type.
    pub fn device_types(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(t, &c)| std::iter::repeat_n(t, c))
            .collect()
    }

    /// Collapses types above `m` into type `m`: devices keep their power cap
    /// but a shorter ladder tops out earlier.
    pub fn fold_to(&self, m: usize) -> Self {
        assert!(m >= 1, "cannot fold onto zero types");
        let mut counts = vec![0; m];
        for (t, &c) in self.counts.iter().enumerate() {
            counts[t.min(m - 1)] += c;
        }
        Self { counts }
    }
}

pub(crate) fn check_dims(
    matrix: &TransmissionMatrix,
    pop: &DevicePopulation,
    set: Option<&PowerLevelSet>,
) -> Result<()> {
    if matrix.dim() != pop.num_types() {
        return Err(Error::DimensionMismatch {
            what: "matrix rows vs population types",
            expected: pop.num_types(),
            got: matrix.dim(),
        });
    }
    if let Some(set) = set {
        if set.len() != pop.num_types() {
            return Err(Error::DimensionMismatch {
                what: "power levels vs population types",
                expected: pop.num_types(),
                got: set.len(),
            });
        }
    }
    Ok(())
}

#[inline]
fn draw_choice<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> Option<usize> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (level, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return Some(level);
        }
    }
    None
}

/// One slot's choices: `None` is idle, `Some(l)` is the 0-based level.
pub fn sample_slot_actions<R: Rng + ?Sized>(
    matrix: &TransmissionMatrix,
    pop: &DevicePopulation,
    rng: &mut R,
) -> Result<Vec<Option<usize>>> {
    check_dims(matrix, pop, None)?;
    let mut out = Vec::with_capacity(pop.total());
    for (t, &c) in pop.counts().iter().enumerate() {
        let row = matrix.row(t);
        for _ in 0..c {
            out.push(draw_choice(row, rng));
        }
    }
    Ok(out)
}

/// Empirical per-device throughput (bits/s/Hz per slot) over an epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochResult {
    /// Mean over all slots, idle and failed ones included.
    pub device_means: Vec<f64>,
    /// 0-based type of each device.
    pub device_types: Vec<usize>,
    /// Average of `device_means` within each type (0 for an empty type).
    pub type_means: Vec<f64>,
    /// Standard error of each type mean, from the per-slot type averages.
    pub type_std_errors: Vec<f64>,
    pub slots: usize,
    pub seed: u64,
}

impl EpochResult {
    pub fn reward(&self, kind: RewardKind) -> Result<f64> {
        kind.evaluate(&self.device_means)
    }

    pub fn arith_mean(&self) -> f64 {
        if self.device_means.is_empty() {
            0.0
        } else {
            self.device_means.iter().sum::<f64>() / self.device_means.len() as f64
        }
    }

    pub fn total(&self) -> f64 {
        self.device_means.iter().sum()
    }

    pub fn geo_mean(&self) -> f64 {
        rewards::geometric_mean(&self.device_means).unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        rewards::minimum(&self.device_means).unwrap_or(0.0)
    }
}

/// Simulates `slots` independent slots. Same-level groups are assigned to
/// decoding positions by a fresh uniform permutation every slot. Output is a
/// pure function of the arguments.
pub fn run_epoch(
    matrix: &TransmissionMatrix,
    pop: &DevicePopulation,
    set: &PowerLevelSet,
    slots: usize,
    seed: u64,
) -> Result<EpochResult> {
    check_dims(matrix, pop, Some(set))?;
    if slots == 0 {
        return Err(Error::InvalidArgument(
            "slot count must be at least 1".into(),
        ));
    }
    let m = set.len();
    let device_types = pop.device_types();
    let n_dev = device_types.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut sums = vec![0.0; n_dev];
    let mut type_sum = vec![0.0; m];
    let mut type_sumsq = vec![0.0; m];
    let mut slot_type = vec![0.0; m];
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut tx = SlotTransmissions::new(vec![0; m]);

    for _ in 0..slots {
        groups.iter_mut().for_each(Vec::clear);
        for (dev, &t) in device_types.iter().enumerate() {
            if let Some(level) = draw_choice(matrix.row(t), &mut rng) {
                groups[level].push(dev);
            }
        }
        for (c, g) in tx.counts.iter_mut().zip(&groups) {
            *c = g.len();
        }
        slot_type.iter_mut().for_each(|x| *x = 0.0);
        if tx.total() > 0 {
            let decoded = decode_slot(&tx, set)?;
            for (group, outcome) in groups.iter_mut().zip(&decoded.groups) {
                if !outcome.is_decoded() || group.is_empty() {
                    continue;
                }
                group.shuffle(&mut rng);
                for (&dev, &th) in group.iter().zip(&outcome.throughputs) {
                    sums[dev] += th;
                    slot_type[device_types[dev]] += th;
                }
            }
        }
        for (t, &c) in pop.counts().iter().enumerate() {
            if c > 0 {
                let y = slot_type[t] / c as f64;
                type_sum[t] += y;
                type_sumsq[t] += y * y;
            }
        }
    }

    let tf = slots as f64;
    let device_means: Vec<f64> = sums.iter().map(|s| s / tf).collect();
    let type_means = type_sum.iter().map(|s| s / tf).collect();
    let type_std_errors = type_sum
        .iter()
        .zip(&type_sumsq)
        .map(|(&s, &sq)| {
            if slots < 2 {
                return 0.0;
            }
            let mean = s / tf;
            let var = ((sq - tf * mean * mean) / (tf - 1.0)).max(0.0);
            (var / tf).sqrt()
        })
        .collect();

    Ok(EpochResult {
        device_means,
        device_types,
        type_means,
        type_std_errors,
        slots,
        seed,
    })
}
