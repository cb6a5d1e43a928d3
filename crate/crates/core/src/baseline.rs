//! Derivative-free reference optimizers over the transmission matrix, used to
//! audit what the agent learns on small instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{exact_reward_with_budget, outcome_count, DEFAULT_ENUMERATION_BUDGET};
use crate::power::PowerLevelSet;
use crate::rewards::RewardKind;
use crate::sim::{run_epoch, DevicePopulation, TransmissionMatrix};

/// Default cap on grid evaluations (`resolution^params`).
pub const DEFAULT_GRID_BUDGET: f64 = 1e7;
/// Slots per Monte Carlo evaluation when the oracle is out of budget.
pub const FALLBACK_SLOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub matrix: TransmissionMatrix,
    pub reward: f64,
    pub evaluations: usize,
    /// `"exact"` or `"monte-carlo"`.
    pub evaluator: &'static str,
}

/// Points `k / (resolution - 1)` with `sum k <= resolution - 1`, lexicographic.
fn simplex_lattice(entries: usize, resolution: usize) -> Vec<Vec<f64>> {
    let steps = resolution - 1;
    let mut out = Vec::new();
    let mut cur = vec![0usize; entries];
    fn rec(cur: &mut [usize], pos: usize, left: usize, steps: usize, out: &mut Vec<Vec<f64>>) {
        if pos == cur.len() {
            out.push(cur.iter().map(|&k| k as f64 / steps as f64).collect());
            return;
        }
        for k in 0..=left {
            cur[pos] = k;
            rec(cur, pos + 1, left - k, steps, out);
        }
        cur[pos] = 0;
    }
    rec(&mut cur, 0, steps, steps, &mut out);
    out
}

fn check_instance(pop: &DevicePopulation, set: &PowerLevelSet) -> Result<()> {
    if pop.total() == 0 {
        return Err(Error::EmptyPopulation);
    }
    if pop.num_types() != set.len() {
        return Err(Error::DimensionMismatch {
            what: "device types vs power levels",
            expected: set.len(),
            got: pop.num_types(),
        });
    }
    Ok(())
}

/// Exhaustive search over the simplex lattice of every row, scored by the
/// exact oracle. Ties resolve to the lexicographically smallest matrix.
pub fn grid_search(
    pop: &DevicePopulation,
    set: &PowerLevelSet,
    kind: RewardKind,
    resolution: usize,
) -> Result<SearchResult> {
    grid_search_with_budget(pop, set, kind, resolution, DEFAULT_GRID_BUDGET)
}

pub fn grid_search_with_budget(
    pop: &DevicePopulation,
    set: &PowerLevelSet,
    kind: RewardKind,
    resolution: usize,
    budget: f64,
) -> Result<SearchResult> {
    check_instance(pop, set)?;
    if resolution < 2 {
        return Err(Error::InvalidArgument(
            "grid resolution must be at least 2".into(),
        ));
    }
    let m = set.len();
    let params = m * (m + 1) / 2;
    let required = (resolution as f64).powi(params as i32);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let required = outcome_count(pop);
    if required > DEFAULT_ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded {
            required,
            budget: DEFAULT_ENUMERATION_BUDGET,
        });
    }

    let lattices: Vec<Vec<Vec<f64>>> = (1..=m).map(|n| simplex_lattice(n, resolution)).collect();
    let total: usize = lattices.iter().map(Vec::len).product();
    let build = |mut idx: usize| -> TransmissionMatrix {
        let mut rows = vec![Vec::new(); m];
        for t in (0..m).rev() {
            let len = lattices[t].len();
            rows[t] = lattices[t][idx % len].clone();
            idx /= len;
        }
        TransmissionMatrix::new(rows).expect("lattice rows are valid")
    };

    let (best_idx, best_reward) = (0..total)
        .into_par_iter()
        .map(|idx| {
            let matrix = build(idx);
            exact_reward_with_budget(&matrix, pop, set, kind, f64::INFINITY).map(|r| (idx, r))
        })
        .try_reduce(|| (usize::MAX, f64::NEG_INFINITY), |a, b| Ok(better(a, b)))?;

    Ok(SearchResult {
        matrix: build(best_idx),
        reward: best_reward,
        evaluations: total,
        evaluator: "exact",
    })
}

/// Higher reward wins; equal rewards go to the lower index.
fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// Uniform sample from the simplex of row `n` including the idle mass.
fn dirichlet_row<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = draws.iter().sum();
    draws[..n].iter().map(|d| d / sum).collect()
}

/// Best of `samples` uniformly random matrices. Candidates come from one
/// sequential stream, so a longer run always contains a shorter run's
/// candidates for the same seed.
pub fn random_search(
    pop: &DevicePopulation,
    set: &PowerLevelSet,
    kind: RewardKind,
    samples: usize,
    seed: u64,
) -> Result<SearchResult> {
    check_instance(pop, set)?;
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "random search needs at least one sample".into(),
        ));
    }
    let m = set.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<TransmissionMatrix> = (0..samples)
        .map(|_| TransmissionMatrix::new((1..=m).map(|n| dirichlet_row(n, &mut rng)).collect()))
        .collect::<Result<_>>()?;

    let exact = outcome_count(pop) <= DEFAULT_ENUMERATION_BUDGET;
    // common random numbers across candidates
    let mc_seed = crate::ppo::derive_seed(seed, u64::MAX);
    let (best_idx, best_reward) = candidates
        .par_iter()
        .enumerate()
        .map(|(idx, matrix)| {
            let r = if exact {
                exact_reward_with_budget(matrix, pop, set, kind, f64::INFINITY)?
            } else {
                run_epoch(matrix, pop, set, FALLBACK_SLOTS, mc_seed)?.reward(kind)?
            };
            Ok::<_, Error>((idx, r))
        })
        .try_reduce(|| (usize::MAX, f64::NEG_INFINITY), |a, b| Ok(better(a, b)))?;

    Ok(SearchResult {
        matrix: candidates[best_idx].clone(),
        reward: best_reward,
        evaluations: samples,
        evaluator: if exact { "exact" } else { "monte-carlo" },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> PowerLevelSet {
        PowerLevelSet::new(vec![1.0], 1.0, 1.0).unwrap()
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(simplex_lattice(1, 51).len(), 51);
        assert_eq!(simplex_lattice(2, 51).len(), 51 * 52 / 2);
        assert_eq!(
            simplex_lattice(2, 3)[..3],
            [vec![0.0, 0.0], vec![0.0, 0.5], vec![0.0, 1.0]]
        );
    }

    #[test]
    fn lone_device_transmits_always() {
        let r = grid_search(
            &DevicePopulation::new(vec![1]),
            &unit(),
            RewardKind::TotalThroughput,
            51,
        )
        .unwrap();
        assert_eq!(r.matrix.get(0, 0), 1.0);
        assert!((r.reward - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_devices_half_probability() {
        let r = grid_search(
            &DevicePopulation::new(vec![2]),
            &unit(),
            RewardKind::TotalThroughput,
            51,
        )
        .unwrap();
        assert!((r.matrix.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((r.reward - 0.5).abs() < 1e-14);
    }

    #[test]
    fn empty_population_rejected() {
        assert!(matches!(
            grid_search(
                &DevicePopulation::new(vec![0]),
                &unit(),
                RewardKind::MinThroughput,
                11
            ),
            Err(Error::EmptyPopulation)
        ));
        assert!(random_search(
            &DevicePopulation::new(vec![0]),
            &unit(),
            RewardKind::MinThroughput,
            3,
            0
        )
        .is_err());
    }

    #[test]
    fn grid_budget() {
        let set = crate::power::geometric_level_set(16.0, 1.0, 1.0, 5).unwrap();
        let pop = DevicePopulation::new(vec![1; 5]);
        assert!(matches!(
            grid_search(&pop, &set, RewardKind::TotalThroughput, 3),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn random_search_reproducible_and_nested() {
        let pop = DevicePopulation::new(vec![2]);
        let one_a = random_search(&pop, &unit(), RewardKind::TotalThroughput, 1, 5).unwrap();
        let one_b = random_search(&pop, &unit(), RewardKind::TotalThroughput, 1, 5).unwrap();
        assert_eq!(one_a, one_b);
        let few = random_search(&pop, &unit(), RewardKind::TotalThroughput, 100, 5).unwrap();
        let many = random_search(&pop, &unit(), RewardKind::TotalThroughput, 10_000, 5).unwrap();
        assert!(many.reward >= few.reward);
        assert!(many.reward >= 0.98 * 0.5);
    }
}
