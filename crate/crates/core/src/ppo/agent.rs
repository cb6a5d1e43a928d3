//! Stateless PPO actor-critic.
//!
//! There is no observation: both networks see the constant input `1.0`, every
//! episode is a single step, and the return of an episode is its reward. The
//! actor outputs the mean and log standard deviation of an independent
//! Gaussian over the `2M` raw Beta-shape actions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::mlp::Mlp;
use crate::beta::RawAction;
use crate::error::{Error, Result};

const STATE: [f64; 1] = [1.0];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
/// Largest log-ratio fed to `exp` in the surrogate.
const MAX_LOG_RATIO: f64 = 50.0;
/// Output-layer weight scale for both actor heads at initialization.
const HEAD_INIT_SCALE: f64 = 0.01;

/// PPO and network hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub clip_epsilon: f64,
    /// Gradient passes over each collected batch.
    pub gradient_epochs: usize,
    /// Episodes collected per update.
    pub batch: usize,
    pub log_std_min: f64,
    pub log_std_max: f64,
    pub init_std: f64,
    pub init: InitPolicy,
}

/// Starting point of the policy mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    /// `Uniform` for the total reward, `TransmitProb(min(1/N, 0.5))` for the
    /// fairness rewards with `N` devices.
    #[default]
    Auto,
    /// All-zero raw action: every row of the matrix is uniform.
    Uniform,
    /// Every type transmits with this total probability, skewed to its top level.
    TransmitProb(f64),
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            actor_lr: 1e-4,
            critic_lr: 1e-4,
            clip_epsilon: 0.3,
            gradient_epochs: 4,
            batch: 8,
            log_std_min: -5.0,
            log_std_max: 2.0,
            init_std: 0.6,
            init: InitPolicy::Auto,
        }
    }
}

impl PpoConfig {
    // negated comparisons so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer sizes must be non-empty and positive".into());
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("learning rates must be positive".into());
        }
        if !(self.clip_epsilon > 0.0) {
            return bad("clip epsilon must be positive".into());
        }
        if self.gradient_epochs == 0 || self.batch == 0 {
            return bad("batch and gradient_epochs must be at least 1".into());
        }
        if !(self.log_std_min < self.log_std_max) {
            return bad("log_std_min must be below log_std_max".into());
        }
        if !(self.init_std > 0.0) {
            return bad("init_std must be positive".into());
        }
        if let InitPolicy::TransmitProb(p) = self.init {
            if !(p > 0.0 && p < 1.0) {
                return bad(format!(
                    "initial transmit probability must be in (0, 1), got {p}"
                ));
            }
        }
        Ok(())
    }
}

/// Actor network: `1 -> hidden... -> [mu (2M) | log_std (2M)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub net: Mlp,
    action_dim: usize,
    log_std_min: f64,
    log_std_max: f64,
}

/// Gaussian head outputs for the constant state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHead {
    pub mean: Vec<f64>,
    /// Clamped log standard deviation.
    pub log_std: Vec<f64>,
    /// Whether the clamp was inactive (gradient flows) per component.
    pub log_std_free: Vec<bool>,
}

impl GaussianHead {
    pub fn std(&self) -> Vec<f64> {
        self.log_std.iter().map(|l| l.exp()).collect()
    }
}

impl PolicyParams {
    /// Random hidden layers; both heads start near zero weight so the initial
    /// mean is close to `init_mean` (zeros, i.e. uniform Beta, when `None`)
    /// and the spread close to `init_std`.
    pub fn new<R: Rng + ?Sized>(
        levels: usize,
        cfg: &PpoConfig,
        init_mean: Option<&[f64]>,
        rng: &mut R,
    ) -> Self {
        let action_dim = 2 * levels;
        let mut sizes = vec![1];
        sizes.extend(&cfg.hidden);
        sizes.push(2 * action_dim);
        let mut net = Mlp::new(&sizes, rng);
        let last = sizes.len() - 2;
        let fan_in = sizes[last];
        let (w, b) = net.layer_mut(last);
        w.iter_mut().for_each(|x| *x *= HEAD_INIT_SCALE);
        let init_log_std = cfg.init_std.ln();
        for (o, bias) in b.iter_mut().enumerate() {
            *bias = if o < action_dim {
                init_mean.map_or(0.0, |m| m[o])
            } else {
                init_log_std
            };
        }
        debug_assert_eq!(w.len(), fan_in * 2 * action_dim);
        Self {
            net,
            action_dim,
            log_std_min: cfg.log_std_min,
            log_std_max: cfg.log_std_max,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn head(&self) -> GaussianHead {
        self.head_from(self.net.forward(&STATE).output())
    }

    fn head_from(&self, out: &[f64]) -> GaussianHead {
        let (mean, raw) = out.split_at(self.action_dim);
        let log_std = raw
            .iter()
            .map(|&l| l.clamp(self.log_std_min, self.log_std_max))
            .collect();
        let log_std_free = raw
            .iter()
            .map(|&l| l > self.log_std_min && l < self.log_std_max)
            .collect();
        GaussianHead {
            mean: mean.to_vec(),
            log_std,
            log_std_free,
        }
    }

    pub fn log_prob(&self, action: &RawAction) -> f64 {
        gaussian_log_prob(&self.head(), &action.0)
    }

    /// Deterministic action (the Gaussian mean).
    pub fn mean_action(&self) -> RawAction {
        RawAction(self.head().mean)
    }
}

/// Critic network: `1 -> hidden... -> V`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueParams {
    pub net: Mlp,
}

impl ValueParams {
    pub fn new<R: Rng + ?Sized>(cfg: &PpoConfig, rng: &mut R) -> Self {
        let mut sizes = vec![1];
        sizes.extend(&cfg.hidden);
        sizes.push(1);
        Self {
            net: Mlp::new(&sizes, rng),
        }
    }

    pub fn value(&self) -> f64 {
        self.net.forward(&STATE).output()[0]
    }
}

pub fn gaussian_log_prob(head: &GaussianHead, action: &[f64]) -> f64 {
    action
        .iter()
        .zip(&head.mean)
        .zip(&head.log_std)
        .map(|((&a, &mu), &ls)| {
            let z = (a - mu) / ls.exp();
            -0.5 * z * z - ls - HALF_LN_2PI
        })
        .sum()
}

/// Draws each component from `N(mu_j, sigma_j^2)`; returns the action and its
/// log-density under the sampling policy.
pub fn sample_action<R: Rng + ?Sized>(policy: &PolicyParams, rng: &mut R) -> (RawAction, f64) {
    let head = policy.head();
    let action: Vec<f64> = head
        .mean
        .iter()
        .zip(&head.log_std)
        .map(|(&mu, &ls)| {
            let z: f64 = rng.sample(StandardNormal);
            mu + ls.exp() * z
        })
        .collect();
    let lp = gaussian_log_prob(&head, &action);
    (RawAction(action), lp)
}

/// `min(r A, clip(r, 1-eps, 1+eps) A)` with `r = exp(logp_new - logp_old)`.
pub fn clipped_surrogate(logp_new: f64, logp_old: f64, advantage: f64, epsilon: f64) -> f64 {
    let r = ratio(logp_new, logp_old);
    (r * advantage).min(r.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage)
}

fn ratio(logp_new: f64, logp_old: f64) -> f64 {
    (logp_new - logp_old).min(MAX_LOG_RATIO).exp()
}

/// `d surrogate / d logp_new`: `r A` while the unclipped branch is selected,
/// zero once clipping takes over.
fn surrogate_weight(logp_new: f64, logp_old: f64, advantage: f64, epsilon: f64) -> f64 {
    let r = ratio(logp_new, logp_old);
    if r * advantage <= r.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage {
        r * advantage
    } else {
        0.0
    }
}

/// Squared residual `(G - V)^2`.
pub fn critic_loss(reward: f64, value: f64) -> f64 {
    let d = reward - value;
    d * d
}

/// One single-step episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub action: RawAction,
    /// Log-density under the policy that sampled `action`.
    pub log_prob: f64,
    pub reward: f64,
    /// Filled in by [`PpoAgent::update`] from the pre-update critic.
    pub advantage: f64,
}

impl EpisodeRecord {
    pub fn new(action: RawAction, log_prob: f64, reward: f64) -> Self {
        Self {
            action,
            log_prob,
            reward,
            advantage: 0.0,
        }
    }
}

/// Mean negated clipped surrogate over the batch and its gradient w.r.t. the
/// actor parameters. Uses the advantages stored in the records.
pub fn actor_loss_and_grad(
    policy: &PolicyParams,
    batch: &[EpisodeRecord],
    epsilon: f64,
) -> (f64, Vec<f64>) {
    let cache = policy.net.forward(&STATE);
    let head = policy.head_from(cache.output());
    let dim = policy.action_dim;
    let inv_b = 1.0 / batch.len() as f64;
    let inv_var: Vec<f64> = head.log_std.iter().map(|l| (-2.0 * l).exp()).collect();

    let mut loss = 0.0;
    let mut grad_out = vec![0.0; 2 * dim];
    for rec in batch {
        let lp = gaussian_log_prob(&head, &rec.action.0);
        loss -= inv_b * clipped_surrogate(lp, rec.log_prob, rec.advantage, epsilon);
        let w = surrogate_weight(lp, rec.log_prob, rec.advantage, epsilon);
        if w == 0.0 {
            continue;
        }
        for j in 0..dim {
            let diff = rec.action.0[j] - head.mean[j];
            grad_out[j] -= inv_b * w * diff * inv_var[j];
            if head.log_std_free[j] {
                grad_out[dim + j] -= inv_b * w * (diff * diff * inv_var[j] - 1.0);
            }
        }
    }
    (loss, policy.net.backward(&cache, &grad_out))
}

/// Mean critic loss over the batch and its gradient w.r.t. the critic.
pub fn critic_loss_and_grad(value: &ValueParams, batch: &[EpisodeRecord]) -> (f64, Vec<f64>) {
    let cache = value.net.forward(&STATE);
    let v = cache.output()[0];
    let inv_b = 1.0 / batch.len() as f64;
    let loss = batch.iter().map(|r| critic_loss(r.reward, v)).sum::<f64>() * inv_b;
    let dv = -2.0 * inv_b * batch.iter().map(|r| r.reward - v).sum::<f64>();
    (loss, value.net.backward(&cache, &[dv]))
}

/// Per-update statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpdateDiagnostics {
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub baseline: f64,
    /// Fraction of (record, pass) pairs where clipping zeroed the gradient.
    pub clip_fraction: f64,
    pub mean_std: f64,
}

/// Actor, critic and their optimizers.
#[derive(Debug, Clone)]
pub struct PpoAgent {
    pub policy: PolicyParams,
    pub value: ValueParams,
    actor_opt: Adam,
    critic_opt: Adam,
    config: PpoConfig,
    updates: usize,
}

impl PpoAgent {
    /// Agent whose initial policy mean is the uniform Beta on every row.
    pub fn new(levels: usize, config: PpoConfig, seed: u64) -> Result<Self> {
        Self::build(levels, config, seed, None)
    }

    /// Agent whose initial policy mean is `init` (e.g. from
    /// [`crate::beta::action_for_transmit_prob`]).
    pub fn with_initial_action(
        levels: usize,
        config: PpoConfig,
        seed: u64,
        init: &RawAction,
    ) -> Result<Self> {
        if init.0.len() != 2 * levels {
            return Err(Error::DimensionMismatch {
                what: "initial action length",
                expected: 2 * levels,
                got: init.0.len(),
            });
        }
        Self::build(levels, config, seed, Some(&init.0))
    }

    fn build(levels: usize, config: PpoConfig, seed: u64, init: Option<&[f64]>) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = PolicyParams::new(levels, &config, init, &mut rng);
        let value = ValueParams::new(&config, &mut rng);
        Ok(Self {
            actor_opt: Adam::new(policy.net.params().len(), config.actor_lr),
            critic_opt: Adam::new(value.net.params().len(), config.critic_lr),
            policy,
            value,
            config,
            updates: 0,
        })
    }

    pub fn config(&self) -> &PpoConfig {
        &self.config
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (RawAction, f64) {
        sample_action(&self.policy, rng)
    }

    /// Sets advantages from the current (pre-update) critic, normalizing them
    /// across the batch when it holds more than one record.
    pub fn compute_advantages(&self, batch: &mut [EpisodeRecord]) -> f64 {
        let baseline = self.value.value();
        for rec in batch.iter_mut() {
            rec.advantage = rec.reward - baseline;
        }
        if batch.len() > 1 {
            let n = batch.len() as f64;
            let mean = batch.iter().map(|r| r.advantage).sum::<f64>() / n;
            let var = batch
                .iter()
                .map(|r| (r.advantage - mean).powi(2))
                .sum::<f64>()
                / n;
            let scale = 1.0 / (var.sqrt() + 1e-8);
            for rec in batch.iter_mut() {
                rec.advantage = (rec.advantage - mean) * scale;
            }
        }
        baseline
    }

    /// Runs `gradient_epochs` Adam steps on the actor (ascending the clipped
    /// surrogate) and the critic (descending the squared residual).
    pub fn update(&mut self, batch: &mut [EpisodeRecord]) -> Result<UpdateDiagnostics> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let baseline = self.compute_advantages(batch);
        let eps = self.config.clip_epsilon;
        let mut first = None;
        let mut clipped = 0usize;
        for _ in 0..self.config.gradient_epochs {
            let head = self.policy.head();
            clipped += batch
                .iter()
                .filter(|r| {
                    let lp = gaussian_log_prob(&head, &r.action.0);
                    r.advantage != 0.0 && surrogate_weight(lp, r.log_prob, r.advantage, eps) == 0.0
                })
                .count();

            let (a_loss, a_grad) = actor_loss_and_grad(&self.policy, batch, eps);
            let (c_loss, c_grad) = critic_loss_and_grad(&self.value, batch);
            if !(a_loss.is_finite() && c_loss.is_finite())
                || a_grad.iter().chain(&c_grad).any(|g| !g.is_finite())
            {
                return Err(Error::NonFinite {
                    update: self.updates,
                    detail: format!(
                        "actor loss {a_loss}, critic loss {c_loss}, baseline {baseline}"
                    ),
                });
            }
            first.get_or_insert((a_loss, c_loss));
            self.actor_opt.step(self.policy.net.params_mut(), &a_grad);
            self.critic_opt.step(self.value.net.params_mut(), &c_grad);
        }
        self.updates += 1;
        let (actor_loss, critic_loss) = first.expect("gradient_epochs >= 1");
        let std = self.policy.head().std();
        Ok(UpdateDiagnostics {
            actor_loss,
            critic_loss,
            baseline,
            clip_fraction: clipped as f64 / (batch.len() * self.config.gradient_epochs) as f64,
            mean_std: std.iter().sum::<f64>() / std.len() as f64,
        })
    }
}
