//! The TD3 agent: twin critics with clipped double-Q targets, target
//! policy smoothing, delayed actor updates, and soft target updates.

use ndarray::{concatenate, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::adam::Adam;
use super::mlp::{Mlp, MlpGrads, OutputActivation};
use super::{Td3Config, Td3Error};
use crate::envs::{ACT_DIM, OBS_DIM};
use crate::td3::Transition;

pub use super::mlp::soft_update;

#[derive(Debug, Clone, Copy)]
pub struct Losses {
    pub critic1: f64,
    pub critic2: f64,
    /// Present only on delayed-update calls.
    pub actor: Option<f64>,
}

pub struct Td3Agent {
    pub(crate) actor: Mlp,
    pub(crate) critic1: Mlp,
    pub(crate) critic2: Mlp,
    pub(crate) target_actor: Mlp,
    pub(crate) target_critic1: Mlp,
    pub(crate) target_critic2: Mlp,
    adam_actor: Adam,
    adam_critic1: Adam,
    adam_critic2: Adam,
    obs_dim: usize,
    act_dim: usize,
    discount: f64,
    tau: f64,
    policy_delay: usize,
    target_noise_std: f64,
    target_noise_clip: f64,
    update_count: usize,
}

impl Td3Agent {
    /// Fresh agent for the 10-dim observation / 4-dim action interface.
    pub fn new<R: Rng>(cfg: &Td3Config, rng: &mut R) -> Self {
        Self::with_dims(OBS_DIM, ACT_DIM, cfg, rng)
    }

    /// Fresh agent with explicit dimensions (tiny networks in tests).
    pub fn with_dims<R: Rng>(obs_dim: usize, act_dim: usize, cfg: &Td3Config, rng: &mut R) -> Self {
        let mut actor_sizes = vec![obs_dim];
        actor_sizes.extend_from_slice(&cfg.hidden);
        actor_sizes.push(act_dim);
        let mut critic_sizes = vec![obs_dim + act_dim];
        critic_sizes.extend_from_slice(&cfg.hidden);
        critic_sizes.push(1);

        let actor = Mlp::new(&actor_sizes, OutputActivation::Tanh, rng);
        let critic1 = Mlp::new(&critic_sizes, OutputActivation::Linear, rng);
        let critic2 = Mlp::new(&critic_sizes, OutputActivation::Linear, rng);
        Self::assemble(actor, critic1, critic2, obs_dim, act_dim, cfg, 0)
    }

    fn assemble(
        actor: Mlp,
        critic1: Mlp,
        critic2: Mlp,
        obs_dim: usize,
        act_dim: usize,
        cfg: &Td3Config,
        update_count: usize,
    ) -> Self {
        Td3Agent {
            target_actor: actor.clone(),
            target_critic1: critic1.clone(),
            target_critic2: critic2.clone(),
            adam_actor: Adam::new(&actor, cfg.actor_lr),
            adam_critic1: Adam::new(&critic1, cfg.critic_lr),
            adam_critic2: Adam::new(&critic2, cfg.critic_lr),
            actor,
            critic1,
            critic2,
            obs_dim,
            act_dim,
            discount: cfg.discount,
            tau: cfg.tau,
            policy_delay: cfg.policy_delay,
            target_noise_std: cfg.target_noise_std,
            target_noise_clip: cfg.target_noise_clip,
            update_count,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn update_count(&self) -> usize {
        self.update_count
    }

    /// Deterministic policy output for a normalized observation, plus
    /// optional exploration noise, clamped to [−1, 1]⁴.
    pub fn select_action(
        &self,
        obs: &[f64; OBS_DIM],
        noise: Option<&[f64; ACT_DIM]>,
    ) -> [f64; ACT_DIM] {
        debug_assert_eq!(self.obs_dim, OBS_DIM);
        let x = Array2::from_shape_vec((1, OBS_DIM), obs.to_vec()).expect("fixed shape");
        let a = self.actor.forward(&x);
        std::array::from_fn(|i| {
            let n = noise.map_or(0.0, |n| n[i]);
            (a[[0, i]] + n).clamp(-1.0, 1.0)
        })
    }

    /// Bootstrapped critic targets `y = r + γ(1−done)·min(Q1', Q2')` with
    /// clipped smoothing noise on the target action. Exposed for
    /// diagnostics and tests.
    pub fn target_values<R: Rng>(&self, batch: &[Transition], rng: &mut R) -> Array2<f64> {
        let b = batch.len();
        let next_obs = Array2::from_shape_fn((b, self.obs_dim), |(i, j)| batch[i].next_obs[j]);
        let next_a = self.target_actor.forward(&next_obs);
        let noise = sample_clipped_noise(
            rng,
            self.target_noise_std,
            self.target_noise_clip,
            (b, self.act_dim),
        );
        let next_a = (next_a + noise).mapv(|v| v.clamp(-1.0, 1.0));
        let input = concatenate(Axis(1), &[next_obs.view(), next_a.view()]).expect("same rows");
        let q1 = self.target_critic1.forward(&input);
        let q2 = self.target_critic2.forward(&input);
        Array2::from_shape_fn((b, 1), |(i, _)| {
            let q = q1[[i, 0]].min(q2[[i, 0]]);
            let not_done = if batch[i].done { 0.0 } else { 1.0 };
            batch[i].reward + self.discount * not_done * q
        })
    }

    /// One TD3 update on a sampled batch: both critics regress to the
    /// clipped double-Q target; every `policy_delay`-th call also ascends
    /// Q1 through the actor and soft-updates all targets.
    pub fn update<R: Rng>(&mut self, batch: &[Transition], rng: &mut R) -> Result<Losses, Td3Error> {
        if batch.is_empty() {
            return Err(Td3Error::InsufficientBuffer { have: 0, need: 1 });
        }
        let b = batch.len();
        let obs = Array2::from_shape_fn((b, self.obs_dim), |(i, j)| batch[i].obs[j]);
        let act = Array2::from_shape_fn((b, self.act_dim), |(i, j)| batch[i].action[j]);
        let input = concatenate(Axis(1), &[obs.view(), act.view()]).expect("same rows");
        let y = self.target_values(batch, rng);

        let (loss1, grads1) = critic_loss_grads(&self.critic1, &input, &y);
        self.adam_critic1.step(&mut self.critic1, &grads1);
        let (loss2, grads2) = critic_loss_grads(&self.critic2, &input, &y);
        self.adam_critic2.step(&mut self.critic2, &grads2);

        self.update_count += 1;
        let actor_loss = if self.update_count % self.policy_delay == 0 {
            let (loss, grads) = actor_objective_grads(&self.actor, &self.critic1, &obs);
            self.adam_actor.step(&mut self.actor, &grads);
            self.soft_update_targets()?;
            Some(loss)
        } else {
            None
        };

        Ok(Losses {
            critic1: loss1,
            critic2: loss2,
            actor: actor_loss,
        })
    }

    fn soft_update_targets(&mut self) -> Result<(), Td3Error> {
        soft_update(&mut self.target_actor, &self.actor, self.tau)?;
        soft_update(&mut self.target_critic1, &self.critic1, self.tau)?;
        soft_update(&mut self.target_critic2, &self.critic2, self.tau)?;
        Ok(())
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            obs_dim: self.obs_dim,
            act_dim: self.act_dim,
            update_count: self.update_count,
            actor: self.actor.clone(),
            critic1: self.critic1.clone(),
            critic2: self.critic2.clone(),
            target_actor: self.target_actor.clone(),
            target_critic1: self.target_critic1.clone(),
            target_critic2: self.target_critic2.clone(),
        }
    }

    /// Rebuild from a checkpoint; optimizer moments restart fresh.
    pub fn from_checkpoint(ck: Checkpoint, cfg: &Td3Config) -> Result<Self, Td3Error> {
        ck.validate()?;
        let mut agent = Self::assemble(
            ck.actor,
            ck.critic1,
            ck.critic2,
            ck.obs_dim,
            ck.act_dim,
            cfg,
            ck.update_count,
        );
        agent.target_actor = ck.target_actor;
        agent.target_critic1 = ck.target_critic1;
        agent.target_critic2 = ck.target_critic2;
        if !agent.actor.same_shape(&agent.target_actor)
            || !agent.critic1.same_shape(&agent.target_critic1)
            || !agent.critic2.same_shape(&agent.target_critic2)
        {
            return Err(Td3Error::BadCheckpoint(
                "target network shapes disagree with online networks".into(),
            ));
        }
        Ok(agent)
    }

    pub fn save(&self, path: &Path) -> Result<(), Td3Error> {
        let json = serde_json::to_string(&self.to_checkpoint())
            .map_err(|e| Td3Error::BadCheckpoint(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path, cfg: &Td3Config) -> Result<Self, Td3Error> {
        let json = std::fs::read_to_string(path)?;
        let ck: Checkpoint =
            serde_json::from_str(&json).map_err(|e| Td3Error::BadCheckpoint(e.to_string()))?;
        Self::from_checkpoint(ck, cfg)
    }
}

const CHECKPOINT_FORMAT: &str = "carosac-td3";
const CHECKPOINT_VERSION: u32 = 1;

/// On-disk agent state: plain-text JSON with an architecture header and
/// exact (shortest round-trip) float encoding.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub update_count: usize,
    pub actor: Mlp,
    pub critic1: Mlp,
    pub critic2: Mlp,
    pub target_actor: Mlp,
    pub target_critic1: Mlp,
    pub target_critic2: Mlp,
}

impl Checkpoint {
    fn validate(&self) -> Result<(), Td3Error> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Td3Error::BadCheckpoint(format!(
                "format '{}', expected '{CHECKPOINT_FORMAT}'",
                self.format
            )));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(Td3Error::BadCheckpoint(format!(
                "version {}, expected {CHECKPOINT_VERSION}",
                self.version
            )));
        }
        if self.actor.input_dim() != self.obs_dim
            || self.actor.output_dim() != self.act_dim
            || self.critic1.input_dim() != self.obs_dim + self.act_dim
            || self.critic1.output_dim() != 1
        {
            return Err(Td3Error::BadCheckpoint(
                "network shapes disagree with the header dimensions".into(),
            ));
        }
        Ok(())
    }
}

/// Gaussian noise with std `std`, clamped to ±`clip` componentwise.
pub(crate) fn sample_clipped_noise<R: Rng>(
    rng: &mut R,
    std: f64,
    clip: f64,
    shape: (usize, usize),
) -> Array2<f64> {
    let noise = Array2::from_shape_fn(shape, |_| {
        let n: f64 = rng.sample(StandardNormal);
        (n * std).clamp(-clip, clip)
    });
    debug_assert!(noise.iter().all(|v| v.abs() <= clip));
    noise
}

/// MSE critic loss and its parameter gradients:
/// `L = mean((Q(input) − y)²)`.
pub fn critic_loss_grads(critic: &Mlp, input: &Array2<f64>, y: &Array2<f64>) -> (f64, MlpGrads) {
    let b = input.nrows() as f64;
    let (q, cache) = critic.forward_cached(input);
    let diff = &q - y;
    let loss = diff.mapv(|d| d * d).sum() / b;
    let grad_out = diff * (2.0 / b);
    let (grads, _) = critic.backward(&cache, &grad_out);
    (loss, grads)
}

/// Actor objective `L = −mean Q(obs, π(obs))` and its gradients with
/// respect to the actor parameters (the critic is held fixed and only
/// routes gradients back to its action inputs).
pub fn actor_objective_grads(actor: &Mlp, critic: &Mlp, obs: &Array2<f64>) -> (f64, MlpGrads) {
    let b = obs.nrows() as f64;
    let obs_dim = actor.input_dim();
    let (a, actor_cache) = actor.forward_cached(obs);
    let input = concatenate(Axis(1), &[obs.view(), a.view()]).expect("same rows");
    let (q, critic_cache) = critic.forward_cached(&input);
    let loss = -q.sum() / b;
    let grad_q = Array2::from_elem(q.raw_dim(), -1.0 / b);
    let (_, grad_input) = critic.backward(&critic_cache, &grad_q);
    let grad_a = grad_input.slice(ndarray::s![.., obs_dim..]).to_owned();
    let (grads, _) = actor.backward(&actor_cache, &grad_a);
    (loss, grads)
}
