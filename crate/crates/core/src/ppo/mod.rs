//! Stateless PPO agent for tuning the transmission matrix.

mod adam;
mod agent;
mod mlp;
mod train;

pub use adam::Adam;
pub use agent::{
    actor_loss_and_grad, clipped_surrogate, critic_loss, critic_loss_and_grad, gaussian_log_prob,
    sample_action, EpisodeRecord, GaussianHead, InitPolicy, PolicyParams, PpoAgent, PpoConfig,
    UpdateDiagnostics, ValueParams,
};
pub use mlp::{ForwardCache, Mlp};
pub use train::{
    derive_seed, greedy_matrix, initial_agent, train, Convergence, HistoryRow, MatrixSnapshot,
    TrainOptions, TrainingHistory, THREADS_ENV,
};
