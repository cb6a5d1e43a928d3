//! Exact expected throughput by enumerating every joint action outcome.
//!
//! Devices of one type are exchangeable, so outcomes are grouped by how many
//! devices of each type chose each level (a multinomial composition). Within a
//! decoded same-level group of size `k`, every member's expected throughput
//! over the uniform position permutation is the group's mean position
//! throughput. No sampling is involved.

use crate::error::{Error, Result};
use crate::power::PowerLevelSet;
use crate::rewards::RewardKind;
use crate::sic::{decode_slot, SlotTransmissions};
use crate::sim::{check_dims, DevicePopulation, TransmissionMatrix};

/// Default cap on `prod_n (n+1)^{|N_n|}` joint outcomes.
pub const DEFAULT_ENUMERATION_BUDGET: f64 = 1e7;

/// Number of joint per-device outcomes: each type-`n` device has `n + 1`
/// choices (idle or one of `n` levels).
pub fn outcome_count(pop: &DevicePopulation) -> f64 {
    pop.counts()
        .iter()
        .enumerate()
        .map(|(t, &c)| ((t + 2) as f64).powi(c as i32))
        .product()
}

/// Per-type expected per-slot throughput with the default budget.
pub fn exact_expected_throughput(
    matrix: &TransmissionMatrix,
    pop: &DevicePopulation,
    set: &PowerLevelSet,
) -> Result<Vec<f64>> {
    exact_expected_throughput_with_budget(matrix, pop, set, DEFAULT_ENUMERATION_BUDGET)
}

pub fn exact_expected_throughput_with_budget(
    matrix: &TransmissionMatrix,
    pop: &DevicePopulation,
    set: &PowerLevelSet,
    budget: f64,
) -> Result<Vec<f64>> {
    check_dims(matrix, pop, Some(set))?;
    let required = outcome_count(pop);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let m = set.len();

    // Per type: list of (probability, choices-per-level) compositions.
    let per_type: Vec<Vec<(f64, Vec<usize>)>> = pop
        .counts()
        .iter()
        .enumerate()
        .map(|(t, &c)| compositions(matrix.row(t), matrix.idle_prob(t), c))
        .collect();

    let mut acc = vec![0.0; m];
    let mut chosen: Vec<usize> = vec![0; m];
    let mut counts = vec![0usize; m];
    walk(&per_type, 0, 1.0, &mut chosen, &mut counts, set, &mut acc)?;

    Ok(acc
        .iter()
        .zip(pop.counts())
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect())
}

/// Depth-first product over types. `chosen[t]` indexes `per_type[t]`.
fn walk(
    per_type: &[Vec<(f64, Vec<usize>)>],
    t: usize,
    prob: f64,
    chosen: &mut Vec<usize>,
    counts: &mut Vec<usize>,
    set: &PowerLevelSet,
    acc: &mut [f64],
) -> Result<()> {
    if t == per_type.len() {
        let tx = SlotTransmissions::new(counts.clone());
        let decoded = decode_slot(&tx, set)?;
        let group_mean: Vec<f64> = decoded.groups.iter().map(|g| g.mean_throughput()).collect();
        for (ty, comps) in per_type.iter().enumerate() {
            let per_level = &comps[chosen[ty]].1;
            let sum: f64 = per_level
                .iter()
                .zip(&group_mean)
                .map(|(&k, &g)| k as f64 * g)
                .sum();
            acc[ty] += prob * sum;
        }
        return Ok(());
    }
    for (idx, (p, per_level)) in per_type[t].iter().enumerate() {
        chosen[t] = idx;
        for (c, &k) in counts.iter_mut().zip(per_level) {
            *c += k;
        }
        walk(per_type, t + 1, prob * p, chosen, counts, set, acc)?;
        for (c, &k) in counts.iter_mut().zip(per_level) {
            *c -= k;
        }
    }
    Ok(())
}

/// All ways to split `n` devices over `row.len()` levels plus idle, with
/// multinomial probabilities. Zero-probability compositions are dropped.
fn compositions(row: &[f64], idle: f64, n: usize) -> Vec<(f64, Vec<usize>)> {
    let mut probs = row.to_vec();
    probs.push(idle.max(0.0));
    let bins = probs.len();
    let ln_fact: Vec<f64> = (0..=n)
        .scan(0.0, |s, k| {
            if k > 0 {
                *s += (k as f64).ln();
            }
            Some(*s)
        })
        .collect();

    let mut out = Vec::new();
    let mut split = vec![0usize; bins];
    fill(&mut split, 0, n, &mut |split: &[usize]| {
        let mut ln_p = ln_fact[n];
        for (&k, &p) in split.iter().zip(&probs) {
            if k == 0 {
                continue;
            }
            if p <= 0.0 {
                return;
            }
            ln_p += k as f64 * p.ln() - ln_fact[k];
        }
        // drop the trailing idle bin; shorter than M for lower types
        out.push((ln_p.exp(), split[..bins - 1].to_vec()));
    });
    out
}

fn fill(split: &mut [usize], bin: usize, left: usize, emit: &mut impl FnMut(&[usize])) {
    if bin == split.len() - 1 {
        split[bin] = left;
        emit(split);
        return;
    }
    for k in 0..=left {
        split[bin] = k;
        fill(split, bin + 1, left - k, emit);
    }
}

/// Expands per-type expectations to one value per device.
pub fn per_device(type_values: &[f64], pop: &DevicePopulation) -> Vec<f64> {
    pop.device_types().iter().map(|&t| type_values[t]).collect()
}

/// Reward of the exact expectations (each device gets its type's value).
pub fn exact_reward(
    matrix: &TransmissionMatrix,
    pop: &DevicePopulation,
    set: &PowerLevelSet,
    kind: RewardKind,
) -> Result<f64> {
    exact_reward_with_budget(matrix, pop, set, kind, DEFAULT_ENUMERATION_BUDGET)
}

pub fn exact_reward_with_budget(
    matrix: &TransmissionMatrix,
    pop: &DevicePopulation,
    set: &PowerLevelSet,
    kind: RewardKind,
    budget: f64,
) -> Result<f64> {
    let types = exact_expected_throughput_with_budget(matrix, pop, set, budget)?;
    kind.evaluate(&per_device(&types, pop))
}
