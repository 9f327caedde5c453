//! Seed-deterministic training loop: a random-action warmup phase fills
//! the replay buffer, then the policy trains with decaying OU
//! exploration and one gradient update per environment step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

use super::{OuNoise, ReplayBuffer, Td3Agent, Td3Config, Td3Error, Transition};
use crate::envs::{Action, EnvError, Environment, ACT_DIM};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("{0}")]
    Config(String),
    #[error("environment failed in episode {episode}: {source}")]
    Env {
        episode: usize,
        #[source]
        source: EnvError,
        /// Where the abort checkpoint went, when a checkpoint dir was set.
        checkpoint: Option<PathBuf>,
    },
    #[error(transparent)]
    Agent(#[from] Td3Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One row of the per-episode training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub episode: usize,
    pub steps: usize,
    pub cumulative_reward: f64,
    /// Distance to goal when the episode ended [m].
    pub terminal_g_dist: f64,
    pub success: bool,
    /// Not written to CSV: wall time is inherently non-reproducible.
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    pub episodes: Vec<EpisodeStats>,
}

impl TrainLog {
    /// Deterministic CSV (episode, steps, cumulative_reward,
    /// terminal_g_dist, success).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "episode,steps,cumulative_reward,terminal_g_dist,success")?;
        for e in &self.episodes {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.episode,
                e.steps,
                e.cumulative_reward,
                e.terminal_g_dist,
                u8::from(e.success)
            )?;
        }
        Ok(())
    }

    pub fn mean_reward(&self, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.episodes[range];
        slice.iter().map(|e| e.cumulative_reward).sum::<f64>() / slice.len() as f64
    }

    pub fn success_rate(&self, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.episodes[range];
        slice.iter().filter(|e| e.success).count() as f64 / slice.len() as f64
    }
}

/// Optional sinks for the training loop.
#[derive(Default)]
pub struct TrainOptions<'a> {
    /// Directory for periodic/abort checkpoints; nothing is written when
    /// absent.
    pub checkpoint_dir: Option<&'a Path>,
    /// Per-step episode log CSV sink (episode, step, obs…, action…,
    /// reward terms…, done).
    pub step_log: Option<&'a mut dyn Write>,
}

/// Trains a fresh agent. See [`train_from`] for the staged variant.
pub fn train<E: Environment>(
    env: &mut E,
    cfg: &Td3Config,
    seed: u64,
    opts: TrainOptions<'_>,
) -> Result<(Td3Agent, TrainLog), TrainError> {
    cfg.validate().map_err(TrainError::Config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agent = Td3Agent::new(cfg, &mut rng);
    train_inner(env, cfg, agent, rng, opts)
}

/// Continues training an existing agent (stage two of the staged
/// curriculum: a no-sag checkpoint refined in the sagging environment).
pub fn train_from<E: Environment>(
    env: &mut E,
    cfg: &Td3Config,
    seed: u64,
    agent: Td3Agent,
    opts: TrainOptions<'_>,
) -> Result<(Td3Agent, TrainLog), TrainError> {
    cfg.validate().map_err(TrainError::Config)?;
    let rng = ChaCha8Rng::seed_from_u64(seed);
    train_inner(env, cfg, agent, rng, opts)
}

fn train_inner<E: Environment>(
    env: &mut E,
    cfg: &Td3Config,
    mut agent: Td3Agent,
    mut rng: ChaCha8Rng,
    mut opts: TrainOptions<'_>,
) -> Result<(Td3Agent, TrainLog), TrainError> {
    let rig = env.rig().clone();
    let goal_threshold = env.config().goal_threshold;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut ou = OuNoise::new(cfg.ou_theta, cfg.ou_sigma0, cfg.ou_decay_resolved());
    let mut log = TrainLog::default();

    if let Some(w) = opts.step_log.as_deref_mut() {
        write_step_log_header(w)?;
    }

    for episode in 1..=cfg.n_episodes {
        let started = Instant::now();
        let ep_seed = rng.gen::<u64>();
        let random_phase = episode <= cfg.random_episodes;
        let training_idx = episode.saturating_sub(cfg.random_episodes + 1);

        let mut obs = match env.reset(ep_seed) {
            Ok(o) => o,
            Err(e) => return Err(abort(&agent, opts.checkpoint_dir, episode, e)),
        };
        let mut obs_n = obs.normalized(&rig);
        ou.reset();

        let mut cumulative = 0.0;
        let mut terminal_g = obs.current_position.distance(&obs.target_position);
        let mut steps = 0;
        for step in 1..=cfg.n_steps {
            let a_norm: [f64; ACT_DIM] = if random_phase {
                std::array::from_fn(|_| rng.gen_range(-1.0..=1.0))
            } else {
                let noise = ou.sample(&mut rng, training_idx);
                agent.select_action(&obs_n, Some(&noise))
            };
            let action = Action::from_normalized(&a_norm, &rig);

            let out = match env.step(&action) {
                Ok(o) => o,
                Err(e) => return Err(abort(&agent, opts.checkpoint_dir, episode, e)),
            };
            let next_n = out.obs.normalized(&rig);
            buffer.push(Transition {
                obs: obs_n,
                action: a_norm,
                reward: out.reward.r_full,
                next_obs: next_n,
                done: out.done,
            });

            if !random_phase && buffer.len() >= cfg.batch_size {
                let batch = buffer.sample(&mut rng, cfg.batch_size)?;
                agent.update(&batch, &mut rng)?;
            }

            if let Some(w) = opts.step_log.as_deref_mut() {
                write_step_log_row(w, episode, step, &obs_n, &a_norm, &out)?;
            }

            cumulative += out.reward.r_full;
            terminal_g = out.reward.g_dist;
            obs = out.obs;
            obs_n = next_n;
            steps = step;
            if out.done {
                break;
            }
        }
        let _ = obs;

        log.episodes.push(EpisodeStats {
            episode,
            steps,
            cumulative_reward: cumulative,
            terminal_g_dist: terminal_g,
            success: terminal_g <= goal_threshold,
            wall_time_s: started.elapsed().as_secs_f64(),
        });

        if episode % 50 == 0 {
            log::info!(
                "episode {episode}/{}: reward {cumulative:.3}, terminal g_dist {terminal_g:.3} m",
                cfg.n_episodes
            );
        }
        if let Some(dir) = opts.checkpoint_dir {
            if episode % cfg.checkpoint_every == 0 {
                agent.save(&dir.join(format!("checkpoint_ep{episode:06}.json")))?;
            }
        }
    }

    if let Some(dir) = opts.checkpoint_dir {
        agent.save(&dir.join("agent_final.json"))?;
    }
    Ok((agent, log))
}

fn abort(
    agent: &Td3Agent,
    checkpoint_dir: Option<&Path>,
    episode: usize,
    source: EnvError,
) -> TrainError {
    let checkpoint = checkpoint_dir.map(|dir| dir.join("checkpoint_abort.json"));
    if let Some(path) = &checkpoint {
        if let Err(e) = agent.save(path) {
            log::warn!("failed to write abort checkpoint: {e}");
        }
    }
    TrainError::Env {
        episode,
        source,
        checkpoint,
    }
}

fn write_step_log_header(w: &mut dyn Write) -> std::io::Result<()> {
    write!(w, "episode,step")?;
    for i in 0..10 {
        write!(w, ",obs{i}")?;
    }
    for i in 0..ACT_DIM {
        write!(w, ",action{i}")?;
    }
    writeln!(w, ",r_step,r_dist,r_goal,r_csag,r_cact,r_cdev,r_full,done")
}

fn write_step_log_row(
    w: &mut dyn Write,
    episode: usize,
    step: usize,
    obs_n: &[f64; 10],
    action: &[f64; ACT_DIM],
    out: &crate::envs::StepOutcome,
) -> std::io::Result<()> {
    write!(w, "{episode},{step}")?;
    for v in obs_n {
        write!(w, ",{v}")?;
    }
    for v in action {
        write!(w, ",{v}")?;
    }
    let r = &out.reward;
    writeln!(
        w,
        ",{},{},{},{},{},{},{},{}",
        r.r_step,
        r.r_dist,
        r.r_goal,
        r.r_csag,
        r.r_cact,
        r.r_cdev,
        r.r_full,
        u8::from(out.done)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{EnvConfig, NoSagEnv};
    use crate::rig::RigGeometry;

    fn smoke_cfg() -> Td3Config {
        Td3Config {
            n_episodes: 50,
            n_steps: 20,
            random_episodes: 10,
            batch_size: 32,
            hidden: vec![16, 16],
            ..Td3Config::default()
        }
    }

    #[test]
    fn smoke_run_bookkeeping() {
        let rig = RigGeometry::default();
        let cfg = smoke_cfg();
        let env_cfg = EnvConfig {
            max_steps_per_episode: 20,
            ..EnvConfig::default()
        };
        let mut env = NoSagEnv::new(rig, env_cfg);
        let (_, log) = train(&mut env, &cfg, 1234, TrainOptions::default()).unwrap();
        assert_eq!(log.episodes.len(), 50);
        for (i, e) in log.episodes.iter().enumerate() {
            assert_eq!(e.episode, i + 1);
            assert!(e.steps >= 1 && e.steps <= 20);
            assert!(e.cumulative_reward.is_finite());
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let rig = RigGeometry::default();
        let cfg = smoke_cfg();
        let env_cfg = EnvConfig {
            max_steps_per_episode: 20,
            ..EnvConfig::default()
        };
        let run = || {
            let mut env = NoSagEnv::new(rig.clone(), env_cfg);
            let (agent, log) = train(&mut env, &cfg, 99, TrainOptions::default()).unwrap();
            (agent.actor.params_flat(), log)
        };
        let (p1, l1) = run();
        let (p2, l2) = run();
        assert_eq!(l1.episodes.len(), l2.episodes.len());
        for (a, b) in l1.episodes.iter().zip(l2.episodes.iter()) {
            assert_eq!(a.cumulative_reward.to_bits(), b.cumulative_reward.to_bits());
            assert_eq!(a.terminal_g_dist.to_bits(), b.terminal_g_dist.to_bits());
            assert_eq!(a.steps, b.steps);
        }
        for (a, b) in p1.iter().zip(p2.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn step_log_has_one_row_per_step() {
        let rig = RigGeometry::default();
        let cfg = Td3Config {
            n_episodes: 3,
            n_steps: 5,
            random_episodes: 2,
            batch_size: 8,
            hidden: vec![8],
            ..Td3Config::default()
        };
        let env_cfg = EnvConfig {
            max_steps_per_episode: 5,
            // target can't be hit reliably in 5 random steps, but an
            // episode may still end early on a lucky success
            ..EnvConfig::default()
        };
        let mut env = NoSagEnv::new(rig, env_cfg);
        let mut buf = Vec::new();
        let opts = TrainOptions {
            checkpoint_dir: None,
            step_log: Some(&mut buf),
        };
        let (_, log) = train(&mut env, &cfg, 7, opts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = text.lines().count() - 1; // header
        let expected: usize = log.episodes.iter().map(|e| e.steps).sum();
        assert_eq!(rows, expected);
        assert!(text.starts_with("episode,step,obs0"));
    }

    #[test]
    fn checkpoints_written_on_cadence() {
        let rig = RigGeometry::default();
        let cfg = Td3Config {
            n_episodes: 10,
            n_steps: 5,
            random_episodes: 2,
            batch_size: 8,
            hidden: vec![8],
            checkpoint_every: 4,
            ..Td3Config::default()
        };
        let env_cfg = EnvConfig {
            max_steps_per_episode: 5,
            ..EnvConfig::default()
        };
        let mut env = NoSagEnv::new(rig, env_cfg);
        let dir = tempfile::tempdir().unwrap();
        let opts = TrainOptions {
            checkpoint_dir: Some(dir.path()),
            step_log: None,
        };
        train(&mut env, &cfg, 5, opts).unwrap();
        assert!(dir.path().join("checkpoint_ep000004.json").exists());
        assert!(dir.path().join("checkpoint_ep000008.json").exists());
        assert!(dir.path().join("agent_final.json").exists());
    }
}
