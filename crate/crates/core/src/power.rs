//! Received-power level design.
//!
//! Devices use truncated channel inversion so that their signal arrives at
//! the access point at one of `M` predefined powers `V_1 < ... < V_M`. For
//! descending-power SIC to work, each level must clear the decoding
//! threshold against the sum of all weaker levels plus noise:
//!
//! ```text
//! V_m / (V_1 + ... + V_{m-1} + noise) >= gamma,   and   V_1 / noise >= gamma
//! ```
//!
//! The tightest such ladder is geometric with ratio `1 + gamma`, which gives
//! the largest number of levels below a given `V_max`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack applied to the floor in [`max_num_levels`] so that exact
/// powers (e.g. `log2(16) = 4`) are not truncated by `log` round-off.
const FLOOR_GUARD: f64 = 1e-9;

/// Relative slack for SINR-style threshold comparisons. Geometric designs hit
/// the threshold with equality, which must survive floating-point round-off.
pub(crate) const THRESHOLD_RTOL: f64 = 1e-12;

/// `ratio >= gamma`, tolerating round-off at the boundary.
#[inline]
pub(crate) fn meets_threshold(ratio: f64, gamma: f64) -> bool {
    ratio >= gamma * (1.0 - THRESHOLD_RTOL)
}

/// Received-power targets (ascending), SIC threshold and normalized noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLevelSet")]
pub struct PowerLevelSet {
    levels: Vec<f64>,
    gamma: f64,
    noise: f64,
}

#[derive(Deserialize)]
struct RawLevelSet {
    levels: Vec<f64>,
    gamma: f64,
    noise: f64,
}

impl TryFrom<RawLevelSet> for PowerLevelSet {
    type Error = Error;

    fn try_from(raw: RawLevelSet) -> Result<Self> {
        PowerLevelSet::new(raw.levels, raw.gamma, raw.noise)
    }
}

/// First level (1-based) at which the SIC margin condition fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelViolation {
    pub level: usize,
    /// `V_m / (sum of weaker levels + noise)`.
    pub ratio: f64,
    pub gamma: f64,
}

impl PowerLevelSet {
    /// Builds a level set, checking only the structural invariants
    /// (non-empty, positive, strictly ascending, positive `gamma` and
    /// `noise`). Use [`PowerLevelSet::validate`] for the SIC margin.
    pub fn new(levels: Vec<f64>, gamma: f64, noise: f64) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidLevelSet("no levels".into()));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidLevelSet(format!(
                "gamma must be > 0, got {gamma}"
            )));
        }
        if !(noise.is_finite() && noise > 0.0) {
            return Err(Error::InvalidLevelSet(format!(
                "noise must be > 0, got {noise}"
            )));
        }
        if let Some(bad) = levels.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidLevelSet(format!(
                "level {bad} is not positive"
            )));
        }
        if let Some(w) = levels.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidLevelSet(format!(
                "levels must be strictly ascending ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            levels,
            gamma,
            noise,
        })
    }

    /// Like [`PowerLevelSet::new`], additionally rejecting sets that fail
    /// [`PowerLevelSet::validate`].
    pub fn validated(levels: Vec<f64>, gamma: f64, noise: f64) -> Result<Self> {
        let set = Self::new(levels, gamma, noise)?;
        if let Err(v) = set.validate() {
            return Err(Error::InvalidLevelSet(format!(
                "SIC margin violated at level {}: {:.6} < gamma {}",
                v.level, v.ratio, v.gamma
            )));
        }
        Ok(set)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Number of levels `M`.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    /// Strongest level `V_M`.
    pub fn v_max(&self) -> f64 {
        *self.levels.last().expect("non-empty by construction")
    }

    /// Checks the SIC margin at every level, reporting the first failure.
    pub fn validate(&self) -> std::result::Result<(), LevelViolation> {
        let mut weaker = 0.0;
        for (idx, &v) in self.levels.iter().enumerate() {
            let ratio = v / (weaker + self.noise);
            if !meets_threshold(ratio, self.gamma) {
                return Err(LevelViolation {
                    level: idx + 1,
                    ratio,
                    gamma: self.gamma,
                });
            }
            weaker += v;
        }
        Ok(())
    }
}

/// Free-function form of [`PowerLevelSet::validate`].
pub fn validate_level_set(set: &PowerLevelSet) -> std::result::Result<(), LevelViolation> {
    set.validate()
}

fn check_design_inputs(v_max: f64, gamma: f64, noise: f64) -> Result<()> {
    for (name, x) in [("v_max", v_max), ("gamma", gamma), ("noise", noise)] {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::InfeasibleDesign(format!(
                "{name} must be positive, got {x}"
            )));
        }
    }
    if v_max < gamma * noise {
        return Err(Error::InfeasibleDesign(format!(
            "v_max {v_max} is below gamma*noise = {}; not even one level is decodable",
            gamma * noise
        )));
    }
    Ok(())
}

/// Largest number of levels that fit below `v_max`:
/// `floor(log(v_max / (noise*gamma)) / log(1 + gamma) + 1)`.
pub fn max_num_levels(v_max: f64, gamma: f64, noise: f64) -> Result<usize> {
    check_design_inputs(v_max, gamma, noise)?;
    let x = (v_max / (noise * gamma)).ln() / gamma.ln_1p() + 1.0;
    let m = (x * (1.0 + FLOOR_GUARD)).floor();
    Ok((m as usize).max(1))
}

/// Tightest ladder of `m_levels` levels topping out at `v_max`:
/// `V_m = v_max / (1 + gamma)^(M - m)`, stored ascending.
pub fn geometric_level_set(
    v_max: f64,
    gamma: f64,
    noise: f64,
    m_levels: usize,
) -> Result<PowerLevelSet> {
    let bound = max_num_levels(v_max, gamma, noise)?;
    if m_levels == 0 {
        return Err(Error::InfeasibleDesign(
            "at least one level is required".into(),
        ));
    }
    if m_levels > bound {
        return Err(Error::InfeasibleDesign(format!(
            "{m_levels} levels requested but at most {bound} fit below v_max = {v_max}"
        )));
    }
    let ratio = 1.0 + gamma;
    let levels = (1..=m_levels)
        .map(|m| v_max / ratio.powi((m_levels - m) as i32))
        .collect();
    PowerLevelSet::new(levels, gamma, noise)
}
