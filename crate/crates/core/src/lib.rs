//! NOMA-based p-persistent slotted ALOHA with truncated channel inversion.
//!
//! Devices reach the access point at one of a ladder of received powers; a
//! device's power cap decides how far up the ladder it can go (its *type*).
//! Each slot, a type-`n` device transmits at level `m <= n` with probability
//! `tau[n][m]`, and the access point decodes by descending-power successive
//! interference cancellation. This crate provides:
//!
//! - [`power`]: level-ladder design and feasibility checks,
//! - [`sic`]: single-slot SIC decoding,
//! - [`sim`] and [`oracle`]: Monte Carlo epochs and exact expectations,
//! - [`rewards`]: min / geometric-mean / total objectives,
//! - [`beta`]: the Beta-CDF mapping from raw actions to a matrix,
//! - [`ppo`]: a stateless PPO agent that tunes the matrix,
//! - [`baseline`]: grid and random search references,
//! - [`cli`]: the `noma-ra` command line.

pub mod baseline;
pub mod beta;
pub mod cli;
pub mod config;
pub mod error;
pub mod oracle;
pub mod power;
pub mod ppo;
pub mod rewards;
pub mod sic;
pub mod sim;

pub use baseline::{grid_search, random_search, SearchResult};
pub use beta::{action_for_transmit_prob, action_to_matrix, beta_cdf, shape_params, RawAction};
pub use config::{Config, Scenario};
pub use error::{Error, Result};
pub use oracle::{exact_expected_throughput, exact_reward};
pub use power::{geometric_level_set, max_num_levels, validate_level_set, PowerLevelSet};
pub use rewards::{geo_mean_reward, min_reward, total_reward, RewardKind};
pub use sic::{decode_slot, sinr_at_position, SlotDecodeResult, SlotTransmissions};
pub use sim::{run_epoch, sample_slot_actions, DevicePopulation, EpochResult, TransmissionMatrix};
