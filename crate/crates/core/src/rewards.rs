//! Scalar rewards over per-device mean throughputs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::EpochResult;

/// Objective used to score an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    /// Worst device (max-min fairness).
    #[serde(rename = "min")]
    MinThroughput,
    /// Geometric mean over devices; zero when any device is starved.
    #[serde(rename = "geomean")]
    GeometricMean,
    /// Sum over devices.
    #[serde(rename = "total")]
    TotalThroughput,
}

impl RewardKind {
    pub const ALL: [RewardKind; 3] = [
        RewardKind::MinThroughput,
        RewardKind::GeometricMean,
        RewardKind::TotalThroughput,
    ];

    pub fn evaluate(self, values: &[f64]) -> Result<f64> {
        match self {
            RewardKind::MinThroughput => minimum(values),
            RewardKind::GeometricMean => geometric_mean(values),
            RewardKind::TotalThroughput => total(values),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RewardKind::MinThroughput => "min",
            RewardKind::GeometricMean => "geomean",
            RewardKind::TotalThroughput => "total",
        }
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RewardKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(RewardKind::MinThroughput),
            "geomean" => Ok(RewardKind::GeometricMean),
            "total" => Ok(RewardKind::TotalThroughput),
            other => Err(Error::InvalidArgument(format!(
                "unknown reward kind {other:?} (expected min, geomean or total)"
            ))),
        }
    }
}

fn non_empty(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        Err(Error::EmptyPopulation)
    } else {
        Ok(())
    }
}

pub fn minimum(values: &[f64]) -> Result<f64> {
    non_empty(values)?;
    Ok(values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `(prod x)^(1/n)` accumulated in log space. Exactly 0 if any value is 0.
pub fn geometric_mean(values: &[f64]) -> Result<f64> {
    non_empty(values)?;
    if values.iter().any(|&x| x <= 0.0) {
        return Ok(0.0);
    }
    let mean_ln = values.iter().map(|x| x.ln()).sum::<f64>() / values.len() as f64;
    Ok(mean_ln.exp())
}

pub fn total(values: &[f64]) -> Result<f64> {
    non_empty(values)?;
    Ok(values.iter().sum())
}

pub fn min_reward(r: &EpochResult) -> Result<f64> {
    minimum(&r.device_means)
}

pub fn geo_mean_reward(r: &EpochResult) -> Result<f64> {
    geometric_mean(&r.device_means)
}

pub fn total_reward(r: &EpochResult) -> Result<f64> {
    total(&r.device_means)
}
