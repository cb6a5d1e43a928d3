//! Reference implementations shared by the integration tests. Nothing here
//! calls into the crate's numerical routines it is used to check.
#![allow(dead_code)]

use noma_ra::ppo::{
    actor_loss_and_grad, critic_loss_and_grad, EpisodeRecord, PolicyParams, PpoConfig, ValueParams,
};
use noma_ra::RawAction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `I_x(a, b)` for integer shapes from the binomial tail identity.
pub fn beta_cdf_integer(x: f64, a: u32, b: u32) -> f64 {
    let n = a + b - 1;
    (a..=n)
        .map(|j| binomial(n, j) * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32))
        .sum()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
        + adaptive(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
}

/// Adaptive Simpson over `pieces` equal subintervals, absolute tolerance `tol`.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, pieces: usize, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == pieces { b } else { lo + h };
            let (flo, fhi) = (f(lo), f(hi));
            let (whole, m, fm) = simpson(f, lo, flo, hi, fhi);
            adaptive(f, lo, flo, hi, fhi, whole, m, fm, tol / pieces as f64, 40)
        })
        .sum()
}

fn xlny(a: f64, y: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * y
    }
}

/// `I_x(alpha, beta)` by quadrature of the beta density.
///
/// The interval is split at 1/2. Near an end whose exponent is below one the
/// variable is changed (`s = t^alpha`, `v = (1 - t)^beta`) so the integrand
/// stays bounded; integrands are shifted in log space to avoid overflow.
pub fn beta_cdf_quadrature(x: f64, alpha: f64, beta: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    // left half in its own variable
    let left_sub = alpha < 1.0;
    let left_end = if left_sub { 0.5f64.powf(alpha) } else { 0.5 };
    let left_log = move |s: f64| {
        let t = if left_sub { s.powf(1.0 / alpha) } else { s };
        let lead = if left_sub {
            -alpha.ln()
        } else {
            xlny(alpha - 1.0, t.ln())
        };
        lead + xlny(beta - 1.0, (-t).ln_1p())
    };
    // right half in u = 1 - t
    let right_sub = beta < 1.0;
    let right_end = if right_sub { 0.5f64.powf(beta) } else { 0.5 };
    let right_log = move |v: f64| {
        let u = if right_sub { v.powf(1.0 / beta) } else { v };
        let lead = if right_sub {
            -beta.ln()
        } else {
            xlny(beta - 1.0, u.ln())
        };
        lead + xlny(alpha - 1.0, (-u).ln_1p())
    };

    let grid = 8192;
    let shift = (0..=grid)
        .flat_map(|i| {
            let f = i as f64 / grid as f64;
            [left_log(f * left_end), right_log(f * right_end)]
        })
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let left = move |s: f64| (left_log(s) - shift).exp();
    let right = move |v: f64| (right_log(v) - shift).exp();

    let coarse = integrate(&left, 0.0, left_end, 256, f64::INFINITY)
        + integrate(&right, 0.0, right_end, 256, f64::INFINITY);
    let tol = 1e-12 * coarse;

    let (below, above) = if x <= 0.5 {
        let xs = if left_sub { x.powf(alpha) } else { x };
        let below = integrate(&left, 0.0, xs, 256, tol);
        let above =
            integrate(&left, xs, left_end, 256, tol) + integrate(&right, 0.0, right_end, 256, tol);
        (below, above)
    } else {
        let u = 1.0 - x;
        let us = if right_sub { u.powf(beta) } else { u };
        let above = integrate(&right, 0.0, us, 256, tol);
        let below =
            integrate(&left, 0.0, left_end, 256, tol) + integrate(&right, us, right_end, 256, tol);
        (below, above)
    };
    below / (below + above)
}

fn tiny_config() -> PpoConfig {
    PpoConfig {
        hidden: vec![4, 4],
        ..PpoConfig::default()
    }
}

fn scramble(params: &mut [f64], rng: &mut ChaCha8Rng) {
    for p in params {
        *p = rng.random_range(-0.8..0.8);
    }
}

/// Worst relative error between analytic and central-difference gradients.
/// Components whose magnitude is below `floor` are compared absolutely.
fn worst_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| {
            let scale = a.abs().max(n.abs());
            if scale < floor {
                (a - n).abs() / floor
            } else {
                (a - n).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

const FD_STEP: f64 = 1e-5;
const FD_FLOOR: f64 = 1e-6;
/// Ratios this close to `1 +- eps` are treated as kinks and resampled.
pub const KINK_MARGIN: f64 = 1e-3;

/// Actor batch on a 4-unit network; returns the worst gradient error and the
/// number of records that sat on the unclipped branch.
pub fn actor_gradient_error(seed: u64) -> (f64, usize) {
    let cfg = tiny_config();
    let eps = cfg.clip_epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut policy = PolicyParams::new(2, &cfg, None, &mut rng);
    scramble(policy.net.params_mut(), &mut rng);
    let head = policy.head();
    assert!(head.log_std_free.iter().all(|&f| f));

    let mut batch = Vec::new();
    while batch.len() < 8 {
        let action: Vec<f64> = head
            .mean
            .iter()
            .zip(head.std())
            .map(|(&mu, s)| mu + 1.5 * s * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let action = RawAction(action);
        let old = policy.log_prob(&action) + rng.random_range(-0.6..0.6);
        let r = (policy.log_prob(&action) - old).exp();
        if (r - (1.0 - eps)).abs() < KINK_MARGIN || (r - (1.0 + eps)).abs() < KINK_MARGIN {
            continue;
        }
        let mut rec = EpisodeRecord::new(action, old, 0.0);
        rec.advantage = rng.sample(StandardNormal);
        batch.push(rec);
    }
    let unclipped = batch
        .iter()
        .filter(|rec| {
            let r = (policy.log_prob(&rec.action) - rec.log_prob).exp();
            r * rec.advantage <= r.clamp(1.0 - eps, 1.0 + eps) * rec.advantage
        })
        .count();

    let (_, grad) = actor_loss_and_grad(&policy, &batch, eps);
    let numeric: Vec<f64> = (0..grad.len())
        .map(|i| {
            let mut p = policy.clone();
            p.net.params_mut()[i] += FD_STEP;
            let up = actor_loss_and_grad(&p, &batch, eps).0;
            p.net.params_mut()[i] -= 2.0 * FD_STEP;
            let down = actor_loss_and_grad(&p, &batch, eps).0;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect();
    (worst_error(&grad, &numeric, FD_FLOOR), unclipped)
}

pub fn critic_gradient_error(seed: u64) -> f64 {
    let cfg = tiny_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut value = ValueParams::new(&cfg, &mut rng);
    scramble(value.net.params_mut(), &mut rng);
    let batch: Vec<EpisodeRecord> = (0..8)
        .map(|_| EpisodeRecord::new(RawAction(vec![0.0; 4]), 0.0, rng.random_range(-2.0..2.0)))
        .collect();
    let (_, grad) = critic_loss_and_grad(&value, &batch);
    let numeric: Vec<f64> = (0..grad.len())
        .map(|i| {
            let mut v = value.clone();
            v.net.params_mut()[i] += FD_STEP;
            let up = critic_loss_and_grad(&v, &batch).0;
            v.net.params_mut()[i] -= 2.0 * FD_STEP;
            let down = critic_loss_and_grad(&v, &batch).0;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect();
    worst_error(&grad, &numeric, FD_FLOOR)
}
