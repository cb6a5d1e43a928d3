//! Training loop: sample raw actions, map them to a transmission matrix,
//! simulate an epoch of `T` slots per action, score it, update.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::agent::{EpisodeRecord, InitPolicy, PpoAgent, PpoConfig, UpdateDiagnostics};
use crate::beta::{action_for_transmit_prob, action_to_matrix_with_clamp};
use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::rewards::RewardKind;
use crate::sim::{run_epoch, TransmissionMatrix};

/// Env var capping worker threads for parallel epoch simulation.
pub const THREADS_ENV: &str = "NOMA_RA_THREADS";

/// Plateau test on the per-epoch reward: the mean of the last `window` epochs
/// differs from the mean of the `window` before it by less than `rel_tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub window: usize,
    pub rel_tol: f64,
    /// Never stop before this many epochs.
    pub min_epochs: usize,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            window: 200,
            rel_tol: 0.01,
            min_epochs: 0,
        }
    }
}

impl Convergence {
    pub fn is_met(&self, rewards: &[f64]) -> bool {
        let w = self.window;
        if w == 0 || rewards.len() < 2 * w || rewards.len() < self.min_epochs {
            return false;
        }
        let n = rewards.len();
        let recent = rewards[n - w..].iter().sum::<f64>() / w as f64;
        let before = rewards[n - 2 * w..n - w].iter().sum::<f64>() / w as f64;
        let scale = before.abs().max(recent.abs());
        if scale == 0.0 {
            return true;
        }
        (recent - before).abs() <= self.rel_tol * scale
    }
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub reward: RewardKind,
    pub epochs: usize,
    pub seed: u64,
    /// Stop early once the reward plateaus.
    pub convergence: Option<Convergence>,
    /// Record the mean-action matrix every this many updates (0 disables).
    pub snapshot_every: usize,
}

impl TrainOptions {
    pub fn new(reward: RewardKind, epochs: usize, seed: u64) -> Self {
        Self {
            reward,
            epochs,
            seed,
            convergence: None,
            snapshot_every: 50,
        }
    }
}

/// One epoch (one episode) of training.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub reward: f64,
    pub arith_mean: f64,
    pub geo_mean: f64,
    pub min_throughput: f64,
    pub total: f64,
    pub type_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixSnapshot {
    /// Number of epochs completed when the snapshot was taken.
    pub epoch: usize,
    pub matrix: TransmissionMatrix,
}

#[derive(Debug, Clone)]
pub struct TrainingHistory {
    pub reward: RewardKind,
    pub rows: Vec<HistoryRow>,
    pub snapshots: Vec<MatrixSnapshot>,
    pub diagnostics: Vec<UpdateDiagnostics>,
    /// Agent after the last update (initial weights if nothing ran).
    pub agent: PpoAgent,
    /// Set when training stopped on the plateau test.
    pub converged_at: Option<usize>,
}

impl TrainingHistory {
    /// Matrix of the policy mean, the deterministic output of training.
    pub fn final_matrix(&self, scenario: &Scenario) -> Result<TransmissionMatrix> {
        greedy_matrix(&self.agent, scenario)
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.reward).collect()
    }

    /// Mean of a column over the last `n` rows.
    pub fn tail_mean(&self, n: usize, f: impl Fn(&HistoryRow) -> f64) -> f64 {
        let n = n.min(self.rows.len()).max(1);
        let tail = &self.rows[self.rows.len().saturating_sub(n)..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().map(f).sum::<f64>() / tail.len() as f64
    }

    /// CSV: `epoch,reward,arith_mean,geo_mean,min_throughput,type_1,...`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let m = self.agent.policy.action_dim() / 2;
        let mut header: Vec<String> = [
            "epoch",
            "reward",
            "arith_mean",
            "geo_mean",
            "min_throughput",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend((1..=m).map(|t| format!("type_{t}")));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![
                row.epoch.to_string(),
                row.reward.to_string(),
                row.arith_mean.to_string(),
                row.geo_mean.to_string(),
                row.min_throughput.to_string(),
            ];
            rec.extend(row.type_means.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

pub fn greedy_matrix(agent: &PpoAgent, scenario: &Scenario) -> Result<TransmissionMatrix> {
    action_to_matrix_with_clamp(
        &agent.policy.mean_action(),
        scenario.num_levels(),
        scenario.action_clamp,
    )
}

/// Fresh agent for `scenario`.
///
/// With the uniform start a large population collides in nearly every slot,
/// so the min and geometric-mean rewards are 0 for every sampled action and
/// carry no gradient. `InitPolicy::Auto` starts those rewards from a sparse
/// policy instead.
pub fn initial_agent(
    scenario: &Scenario,
    ppo: &PpoConfig,
    reward: RewardKind,
    seed: u64,
) -> Result<PpoAgent> {
    let m = scenario.num_levels();
    let p = match (ppo.init, reward) {
        (InitPolicy::Uniform, _) | (InitPolicy::Auto, RewardKind::TotalThroughput) => {
            return PpoAgent::new(m, ppo.clone(), derive_seed(seed, 0));
        }
        (InitPolicy::TransmitProb(p), _) => p,
        (InitPolicy::Auto, _) => (1.0 / scenario.population.total().max(1) as f64).min(0.5),
    };
    let init = action_for_transmit_prob(m, p)?;
    PpoAgent::with_initial_action(m, ppo.clone(), derive_seed(seed, 0), &init)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a master seed and a stream index.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Runs the training loop. Bit-identical for identical inputs regardless of
/// thread count: actions are sampled sequentially and each episode's
/// simulation seed depends only on the master seed and the episode index.
pub fn train(scenario: &Scenario, ppo: &PpoConfig, opts: &TrainOptions) -> Result<TrainingHistory> {
    let m = scenario.num_levels();
    let mut agent = initial_agent(scenario, ppo, opts.reward, opts.seed)?;
    let mut action_rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 1));
    let pool = thread_pool()?;

    let mut rows = Vec::with_capacity(opts.epochs);
    let mut snapshots = Vec::new();
    let mut diagnostics = Vec::new();
    let mut converged_at = None;
    let mut rewards = Vec::with_capacity(opts.epochs);

    while rows.len() < opts.epochs {
        let start = rows.len();
        let size = ppo.batch.min(opts.epochs - start);
        let mut batch = Vec::with_capacity(size);
        let mut matrices = Vec::with_capacity(size);
        for _ in 0..size {
            let (action, lp) = agent.sample(&mut action_rng);
            matrices.push(action_to_matrix_with_clamp(
                &action,
                m,
                scenario.action_clamp,
            )?);
            batch.push((action, lp));
        }
        let results = pool.install(|| {
            matrices
                .par_iter()
                .enumerate()
                .map(|(k, matrix)| {
                    let seed = derive_seed(opts.seed, 2 + (start + k) as u64);
                    run_epoch(
                        matrix,
                        &scenario.population,
                        &scenario.levels,
                        scenario.slots,
                        seed,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })?;

        let mut records = Vec::with_capacity(size);
        for (k, ((action, lp), result)) in batch.into_iter().zip(results).enumerate() {
            let reward = result.reward(opts.reward)?;
            rewards.push(reward);
            rows.push(HistoryRow {
                epoch: start + k,
                reward,
                arith_mean: result.arith_mean(),
                geo_mean: result.geo_mean(),
                min_throughput: result.min(),
                total: result.total(),
                type_means: result.type_means.clone(),
            });
            records.push(EpisodeRecord::new(action, lp, reward));
        }
        diagnostics.push(agent.update(&mut records)?);

        if opts.snapshot_every > 0 && agent.updates() % opts.snapshot_every == 0 {
            snapshots.push(MatrixSnapshot {
                epoch: rows.len(),
                matrix: greedy_matrix(&agent, scenario)?,
            });
        }
        if let Some(conv) = &opts.convergence {
            if conv.is_met(&rewards) {
                converged_at = Some(rows.len());
                break;
            }
        }
    }

    Ok(TrainingHistory {
        reward: opts.reward,
        rows,
        snapshots,
        diagnostics,
        agent,
        converged_at,
    })
}
