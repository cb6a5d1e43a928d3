//! Beta-CDF parameterization of the transmission matrix.
//!
//! The agent emits two unconstrained numbers per device type. They become
//! Beta shape parameters, and row `n` of the matrix is read off the Beta CDF
//! on an equispaced grid: bin `m` of `[0, n/(n+1)]` is the probability of
//! level `m`, the tail `(n/(n+1), 1]` is the idle probability. Rows are
//! therefore valid probability vectors for any input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::TransmissionMatrix;

/// Raw actions are clamped to `[-ACTION_CLAMP, ACTION_CLAMP]` before `exp`.
pub const ACTION_CLAMP: f64 = 8.0;

/// Interleaved `[a_1, b_1, a_2, b_2, ..., a_M, b_M]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RawAction(pub Vec<f64>);

impl RawAction {
    /// Number of device types covered (`len / 2`).
    pub fn levels(&self) -> usize {
        self.0.len() / 2
    }

    pub fn pair(&self, type_idx: usize) -> (f64, f64) {
        (self.0[2 * type_idx], self.0[2 * type_idx + 1])
    }
}

/// `(exp(a), exp(b))` after clamping both to `[-8, 8]`.
pub fn shape_params(a: f64, b: f64) -> (f64, f64) {
    shape_params_with_clamp(a, b, ACTION_CLAMP)
}

pub fn shape_params_with_clamp(a: f64, b: f64, clamp: f64) -> (f64, f64) {
    let c = |x: f64| {
        if x.is_nan() {
            0.0
        } else {
            x.clamp(-clamp, clamp)
        }
    };
    (c(a).exp(), c(b).exp())
}

/// Raw action under which every type transmits with total probability `p`.
/// Rows use `Beta(alpha, 1)`, whose CDF is `x^alpha`, so within a row the
/// stronger levels get more of the transmit mass.
pub fn action_for_transmit_prob(m: usize, p: f64) -> Result<RawAction> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange(format!(
            "transmit probability {p} not in (0, 1)"
        )));
    }
    let mut raw = Vec::with_capacity(2 * m);
    for n in 1..=m {
        // (n / (n+1))^alpha = p
        let alpha = p.ln() / (n as f64 / (n + 1) as f64).ln();
        raw.push(alpha.ln().clamp(-ACTION_CLAMP, ACTION_CLAMP));
        raw.push(0.0);
    }
    Ok(RawAction(raw))
}

/// Maps a raw action onto an `m`-type transmission matrix.
pub fn action_to_matrix(raw: &RawAction, m: usize) -> Result<TransmissionMatrix> {
    action_to_matrix_with_clamp(raw, m, ACTION_CLAMP)
}

pub fn action_to_matrix_with_clamp(
    raw: &RawAction,
    m: usize,
    clamp: f64,
) -> Result<TransmissionMatrix> {
    if raw.0.len() != 2 * m {
        return Err(Error::DimensionMismatch {
            what: "raw action length",
            expected: 2 * m,
            got: raw.0.len(),
        });
    }
    let mut rows = Vec::with_capacity(m);
    for t in 0..m {
        let n = t + 1;
        let (a, b) = raw.pair(t);
        let (alpha, beta) = shape_params_with_clamp(a, b, clamp);
        let width = (n + 1) as f64;
        let mut prev = 0.0;
        let mut row = Vec::with_capacity(n);
        for level in 1..=n {
            let f = beta_cdf(level as f64 / width, alpha, beta)?;
            row.push((f - prev).max(0.0));
            prev = f;
        }
        rows.push(row);
    }
    TransmissionMatrix::new(rows)
}

/// Regularized incomplete beta `I_x(alpha, beta)`.
pub fn beta_cdf(x: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!(
            "beta_cdf argument {x} not in [0, 1]"
        )));
    }
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "beta shapes must be positive and finite, got ({alpha}, {beta})"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let v = if x < (alpha + 1.0) / (alpha + beta + 2.0) {
        ln_front(x, alpha, beta).exp() * continued_fraction(x, alpha, beta) / alpha
    } else {
        1.0 - ln_front(1.0 - x, beta, alpha).exp() * continued_fraction(1.0 - x, beta, alpha) / beta
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 20_000;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Where the Stirling remainder series is used instead of Lanczos.
const STIRLING_CUTOFF: f64 = 10.0;

/// `ln Gamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2]` for `x >= 10`.
fn stirling_remainder(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
                - r2 * (1.0 / 1680.0
                    - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0 - r2 / 156.0))))))
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x >= STIRLING_CUTOFF {
        return (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_remainder(x);
    }
    if x < 0.5 {
        // Gamma(x) = Gamma(x + 1) / x keeps Lanczos in its accurate range
        return ln_gamma(x + 1.0) - x.ln();
    }
    // Lanczos, g = 7, n = 9
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut sum = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    HALF_LN_2PI + (x + 0.5) * t.ln() - t + sum.ln()
}

/// `ln[x^a (1-x)^b / B(a, b)]`, arranged so that large shapes do not cancel
/// catastrophically.
fn ln_front(x: f64, a: f64, b: f64) -> f64 {
    let ln_x = x.ln();
    let ln_1mx = (-x).ln_1p();
    if a >= STIRLING_CUTOFF && b >= STIRLING_CUTOFF {
        let s = a + b;
        a * (ln_x + (s / a).ln()) + b * (ln_1mx + (s / b).ln()) + 0.5 * (a * b / s).ln()
            - HALF_LN_2PI
            + stirling_remainder(s)
            - stirling_remainder(a)
            - stirling_remainder(b)
    } else if a >= STIRLING_CUTOFF || b >= STIRLING_CUTOFF {
        let (big, small) = if a >= b { (a, b) } else { (b, a) };
        let s = big + small;
        // ln Gamma(s) - ln Gamma(big)
        let ratio = (big - 0.5) * (small / big).ln_1p() + small * s.ln() - small
            + stirling_remainder(s)
            - stirling_remainder(big);
        a * ln_x + b * ln_1mx + ratio - ln_gamma(small)
    } else {
        a * ln_x + b * ln_1mx + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_examples() {
        assert_eq!(shape_params(0.0, 0.0), (1.0, 1.0));
        let (a, b) = shape_params(2f64.ln(), -(2f64.ln()));
        assert!((a - 2.0).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        assert_eq!(shape_params(20.0, 0.0), (8f64.exp(), 1.0));
        assert_eq!(shape_params(-20.0, 8.0), ((-8f64).exp(), 8f64.exp()));
    }

    #[test]
    fn cdf_examples() {
        assert!((beta_cdf(0.5, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((beta_cdf(0.25, 2.0, 2.0).unwrap() - 0.15625).abs() < 1e-15);
        assert_eq!(beta_cdf(0.0, 0.3, 5.0).unwrap(), 0.0);
        assert_eq!(beta_cdf(1.0, 0.3, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn cdf_symmetry_grid() {
        for &a in &[0.01, 0.5, 1.0, 2.5, 30.0, 900.0] {
            for &b in &[0.02, 0.7, 1.0, 4.0, 55.0, 2500.0] {
                for k in 0..=40 {
                    let x = k as f64 / 40.0;
                    let lhs = beta_cdf(x, a, b).unwrap();
                    let rhs = 1.0 - beta_cdf(1.0 - x, b, a).unwrap();
                    assert!(
                        (lhs - rhs).abs() < 1e-12,
                        "a={a} b={b} x={x}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn cdf_domain_errors() {
        assert!(beta_cdf(-0.1, 1.0, 1.0).is_err());
        assert!(beta_cdf(1.1, 1.0, 1.0).is_err());
        assert!(beta_cdf(0.5, 0.0, 1.0).is_err());
        assert!(beta_cdf(0.5, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        // ln(9!) straddles the Lanczos/Stirling switch
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(9.999_999) - ln_gamma(10.000_001)).abs() < 1e-5);
        let ln_fact_20: f64 = (1..20).map(|k| (k as f64).ln()).sum();
        assert!((ln_gamma(20.0) - ln_fact_20).abs() < 1e-12);
    }

    #[test]
    fn uniform_action_matrix() {
        let m = action_to_matrix(&RawAction(vec![0.0; 10]), 5).unwrap();
        for (t, row) in m.rows().iter().enumerate() {
            let expect = 1.0 / (t + 2) as f64;
            for &p in row {
                assert!((p - expect).abs() < 1e-12);
            }
            assert!((m.idle_prob(t) - expect).abs() < 1e-12);
        }
        let m1 = action_to_matrix(&RawAction(vec![0.0, 0.0]), 1).unwrap();
        assert!((m1.get(0, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn beta22_row() {
        let ln2 = 2f64.ln();
        let m = action_to_matrix(&RawAction(vec![0.0, 0.0, ln2, ln2]), 2).unwrap();
        assert!((m.get(1, 0) - 7.0 / 27.0).abs() < 1e-14);
        assert!((m.get(1, 1) - 13.0 / 27.0).abs() < 1e-14);
        assert!((m.idle_prob(1) - 7.0 / 27.0).abs() < 1e-14);
    }

    #[test]
    fn transmit_prob_action() {
        let raw = action_for_transmit_prob(5, 0.025).unwrap();
        let m = action_to_matrix(&raw, 5).unwrap();
        for t in 0..5 {
            assert!((m.transmit_prob(t) - 0.025).abs() < 1e-12);
            let row = m.row(t);
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(action_for_transmit_prob(2, 1.0).is_err());
    }

    #[test]
    fn action_length_checked() {
        assert!(action_to_matrix(&RawAction(vec![0.0; 3]), 2).is_err());
    }
}
