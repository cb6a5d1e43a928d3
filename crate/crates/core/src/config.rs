//! JSON scenario/training configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power::{geometric_level_set, PowerLevelSet};
use crate::ppo::{InitPolicy, PpoConfig};
use crate::sim::DevicePopulation;

/// One configuration file covers the network scenario and the PPO
/// hyperparameters. Every field has a default; the defaults are the
/// five-level reference scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Devices per type, type 1 first.
    pub counts: Vec<usize>,
    pub v_max: f64,
    pub gamma: f64,
    pub noise: f64,
    /// Number of levels; defaults to `counts.len()`.
    pub levels: Option<usize>,
    /// Explicit ascending received powers, overriding the geometric design.
    pub level_set: Option<Vec<f64>>,
    /// Slots per epoch (`T`).
    pub slots: usize,
    pub batch: usize,
    pub gradient_epochs: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub clip_epsilon: f64,
    pub action_clamp: f64,
    pub log_std_min: f64,
    pub log_std_max: f64,
    pub init_std: f64,
    pub init: InitPolicy,
    pub hidden: Vec<usize>,
}

impl Default for Config {
    fn default() -> Self {
        let ppo = PpoConfig::default();
        Self {
            counts: vec![5, 5, 8, 10, 12],
            v_max: 16.0,
            gamma: 1.0,
            noise: 1.0,
            levels: None,
            level_set: None,
            slots: 3000,
            batch: ppo.batch,
            gradient_epochs: ppo.gradient_epochs,
            actor_lr: ppo.actor_lr,
            critic_lr: ppo.critic_lr,
            clip_epsilon: ppo.clip_epsilon,
            action_clamp: crate::beta::ACTION_CLAMP,
            log_std_min: ppo.log_std_min,
            log_std_max: ppo.log_std_max,
            init_std: ppo.init_std,
            init: ppo.init,
            hidden: ppo.hidden,
        }
    }
}

/// Population, level set and epoch length resolved from a [`Config`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub population: DevicePopulation,
    pub levels: PowerLevelSet,
    pub slots: usize,
    pub action_clamp: f64,
}

impl Scenario {
    pub fn new(population: DevicePopulation, levels: PowerLevelSet, slots: usize) -> Result<Self> {
        if population.num_types() != levels.len() {
            return Err(Error::DimensionMismatch {
                what: "device types vs power levels",
                expected: levels.len(),
                got: population.num_types(),
            });
        }
        if population.total() == 0 {
            return Err(Error::EmptyPopulation);
        }
        if slots == 0 {
            return Err(Error::InvalidArgument("slots must be at least 1".into()));
        }
        Ok(Self {
            population,
            levels,
            slots,
            action_clamp: crate::beta::ACTION_CLAMP,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// The same devices on the `m` weakest rungs of this ladder. Each device
    /// keeps its power cap, so types above `m` collapse into type `m`.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.num_levels() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate a {}-level scenario to {m} levels",
                self.num_levels()
            )));
        }
        let levels = PowerLevelSet::new(
            self.levels.levels()[..m].to_vec(),
            self.levels.gamma(),
            self.levels.noise(),
        )?;
        Ok(Self {
            population: self.population.fold_to(m),
            levels,
            slots: self.slots,
            action_clamp: self.action_clamp,
        })
    }

    /// Reference scenario: 5 levels below `V_max = 16`, counts
    /// `{5, 5, 8, 10, 12}`, `T = 3000`.
    pub fn reference() -> Self {
        Config::default()
            .scenario()
            .expect("default config is valid")
    }
}

impl Config {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn level_set(&self) -> Result<PowerLevelSet> {
        match &self.level_set {
            Some(levels) => PowerLevelSet::validated(levels.clone(), self.gamma, self.noise),
            None => {
                let m = self.levels.unwrap_or(self.counts.len());
                geometric_level_set(self.v_max, self.gamma, self.noise, m)
            }
        }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn scenario(&self) -> Result<Scenario> {
        let mut s = Scenario::new(
            DevicePopulation::new(self.counts.clone()),
            self.level_set()?,
            self.slots,
        )?;
        if !(self.action_clamp > 0.0) {
            return Err(Error::InvalidArgument(
                "action_clamp must be positive".into(),
            ));
        }
        s.action_clamp = self.action_clamp;
        Ok(s)
    }

    pub fn ppo(&self) -> Result<PpoConfig> {
        let cfg = PpoConfig {
            hidden: self.hidden.clone(),
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
            clip_epsilon: self.clip_epsilon,
            gradient_epochs: self.gradient_epochs,
            batch: self.batch,
            log_std_min: self.log_std_min,
            log_std_max: self.log_std_max,
            init_std: self.init_std,
            init: self.init,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_reference_scenario() {
        let s = Scenario::reference();
        assert_eq!(s.levels.levels(), &[1.0, 2.0, 4.0, 8.0, 16.0]);
        assert_eq!(s.population.counts(), &[5, 5, 8, 10, 12]);
        assert_eq!(s.slots, 3000);
        let p = Config::default().ppo().unwrap();
        assert_eq!(p.actor_lr, 1e-4);
        assert_eq!(p.clip_epsilon, 0.3);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c = Config::from_json_str(r#"{"counts":[2,2],"slots":500}"#).unwrap();
        let s = c.scenario().unwrap();
        assert_eq!(s.levels.levels(), &[8.0, 16.0]);
        assert_eq!(s.slots, 500);
    }

    #[test]
    fn explicit_level_set_is_validated() {
        let c = Config::from_json_str(r#"{"counts":[1,1,1],"level_set":[1,2,3]}"#).unwrap();
        assert!(c.scenario().is_err());
        let c = Config::from_json_str(r#"{"counts":[1,1],"level_set":[1,3]}"#).unwrap();
        assert!(c.scenario().is_ok());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = Config::from_json_str("{\n  \"counts\": [1],\n  \"bogus\": 3\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn truncation_keeps_weakest_rungs() {
        let s = Scenario::reference().truncated(3).unwrap();
        assert_eq!(s.levels.levels(), &[1.0, 2.0, 4.0]);
        assert_eq!(s.population.counts(), &[5, 5, 30]);
        assert!(s.levels.validate().is_ok());
        assert!(Scenario::reference().truncated(6).is_err());
    }

    #[test]
    fn mismatched_counts_rejected() {
        let c = Config::from_json_str(r#"{"counts":[1,1],"levels":3}"#).unwrap();
        assert!(c.scenario().is_err());
        let c = Config::from_json_str(r#"{"counts":[0,0]}"#).unwrap();
        assert!(c.scenario().is_err());
    }

    #[test]
    fn init_policy_forms() {
        let init = |j: &str| Config::from_json_str(j).unwrap().ppo().unwrap().init;
        assert_eq!(init("{}"), InitPolicy::Auto);
        assert_eq!(init(r#"{"init":"uniform"}"#), InitPolicy::Uniform);
        assert_eq!(init(r#"{"init":{"transmit_prob":0.1}}"#), InitPolicy::TransmitProb(0.1));
        let c = Config::from_json_str(r#"{"init":{"transmit_prob":1.5}}"#).unwrap();
        assert!(c.ppo().is_err());
    }
}
