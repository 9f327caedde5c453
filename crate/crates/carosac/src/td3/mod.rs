//! From-scratch TD3: actor and twin critics as small fully-connected
//! networks with manual backpropagation and Adam, target networks with
//! soft updates, target-policy smoothing, delayed actor updates, a
//! uniform replay buffer, decaying Ornstein-Uhlenbeck exploration, and
//! the training loop.

mod adam;
mod agent;
mod mlp;
mod ou;
mod replay;
mod train;

pub use adam::Adam;
pub use agent::{soft_update, Checkpoint, Losses, Td3Agent};
pub use mlp::{Mlp, MlpGrads, OutputActivation};
pub use ou::OuNoise;
pub use replay::{ReplayBuffer, Transition};
pub use train::{train, train_from, EpisodeStats, TrainLog, TrainOptions};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Td3Error {
    #[error("replay buffer holds {have} transitions, need {need}")]
    InsufficientBuffer { have: usize, need: usize },
    #[error("network shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Hyper-parameters. The listed defaults are the training setup of the
/// no-sag stage: 5000 episodes of 200 steps, batch 256, actor/critic
/// learning rates 3e-4 / 3e-3, 100 random warmup episodes. Constants the
/// original TD3 algorithm fixes keep their usual values (discount 0.99,
/// tau 0.005, policy delay 2, target noise 0.2 clipped at 0.5).
#[derive(Debug, Clone, PartialEq)]
pub struct Td3Config {
    pub n_episodes: usize,
    pub n_steps: usize,
    pub batch_size: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Leading episodes driven by uniform random actions with no
    /// gradient updates; learning starts afterwards.
    pub random_episodes: usize,
    pub discount: f64,
    pub tau: f64,
    pub policy_delay: usize,
    pub target_noise_std: f64,
    pub target_noise_clip: f64,
    pub ou_theta: f64,
    pub ou_sigma0: f64,
    /// Per-episode multiplier on the OU sigma; when `None` it is derived
    /// so sigma ends at 5% of `ou_sigma0` on the final training episode.
    pub ou_decay: Option<f64>,
    /// Hidden layer widths shared by actor and critics.
    pub hidden: Vec<usize>,
    pub buffer_capacity: usize,
    /// Checkpoint cadence in episodes during training.
    pub checkpoint_every: usize,
}

impl Default for Td3Config {
    fn default() -> Self {
        Td3Config {
            n_episodes: 5000,
            n_steps: 200,
            batch_size: 256,
            actor_lr: 3e-4,
            critic_lr: 3e-3,
            random_episodes: 100,
            discount: 0.99,
            tau: 0.005,
            policy_delay: 2,
            target_noise_std: 0.2,
            target_noise_clip: 0.5,
            ou_theta: 0.15,
            ou_sigma0: 0.3,
            ou_decay: None,
            hidden: vec![256, 256],
            buffer_capacity: 1_000_000,
            checkpoint_every: 100,
        }
    }
}

impl Td3Config {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_episodes == 0 || self.n_steps == 0 || self.batch_size == 0 {
            return Err("n_episodes, n_steps and batch_size must be >= 1".into());
        }
        if !(self.actor_lr > 0.0) || !(self.critic_lr > 0.0) {
            return Err("learning rates must be > 0".into());
        }
        if !(0.0..1.0).contains(&self.discount) && self.discount != 1.0 {
            return Err("discount must be in (0, 1]".into());
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err("tau must be in (0, 1]".into());
        }
        if self.policy_delay == 0 {
            return Err("policy_delay must be >= 1".into());
        }
        if !(self.target_noise_std >= 0.0) || !(self.target_noise_clip >= 0.0) {
            return Err("target noise parameters must be >= 0".into());
        }
        if !(self.ou_theta >= 0.0) || !(self.ou_sigma0 >= 0.0) {
            return Err("OU parameters must be >= 0".into());
        }
        if let Some(d) = self.ou_decay {
            if !(d > 0.0 && d <= 1.0) {
                return Err("ou_decay must be in (0, 1]".into());
            }
        }
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h == 0) {
            return Err("hidden layer widths must be non-empty and positive".into());
        }
        if self.buffer_capacity < self.batch_size {
            return Err("buffer_capacity must be >= batch_size".into());
        }
        if self.checkpoint_every == 0 {
            return Err("checkpoint_every must be >= 1".into());
        }
        if self.random_episodes >= self.n_episodes {
            return Err("random_episodes must be < n_episodes".into());
        }
        Ok(())
    }

    /// Number of policy-driven episodes after the random warmup.
    pub fn training_episodes(&self) -> usize {
        self.n_episodes.saturating_sub(self.random_episodes)
    }

    /// The OU decay in effect: configured, or sized so sigma reaches 5%
    /// of sigma0 on the final training episode.
    pub fn ou_decay_resolved(&self) -> f64 {
        self.ou_decay.unwrap_or_else(|| {
            let n = self.training_episodes();
            if n <= 1 {
                1.0
            } else {
                0.05f64.powf(1.0 / (n - 1) as f64)
            }
        })
    }
}
