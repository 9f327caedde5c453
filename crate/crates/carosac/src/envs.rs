//! The two reinforcement-learning environments and their reward stacks.
//!
//! Both environments share the same interface: a 10-dimensional state
//! (current cable lengths, current robot position, target robot
//! position) and a 4-dimensional action of absolute commanded cable
//! lengths. The no-sag variant resolves actions through the straight-line
//! FK model; the sagging variant commands the XPBD scene and advances a
//! fixed control interval of simulated time.
//!
//! Reward stacks (per step, `d_norm` = distance to goal over the
//! workspace diagonal):
//!
//! ```text
//! no-sag:  r_full = r_step + r_dist + r_goal
//! sagging: r_full = r_step + r_dist + r_csag + r_cact + r_cdev (+ r_goal)
//!
//! r_step = +0.01
//! r_dist = −tanh(2(d_norm − 0.06)) + 0.002
//! r_goal = +1.0 iff g_dist ≤ 0.05 m
//! r_csag = −tanh(c_diff² + 0.09)·0.7 − 0.035
//! r_cact = −tanh(c_ratio)¹⁵ / 10
//! r_cdev = −tanh(a_diff)⁴ / 5
//! ```
//!
//! Per-cable quantities enter as means over the four cables: `c_diff` is
//! the mean sag surplus after the step, `a_diff` the mean absolute gap
//! between the commanded lengths and the straight-line IK of the target,
//! and `c_ratio` the mean commanded length change divided by the distance
//! to goal at decision time (floored at 1e-3 m).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use thiserror::Error;

use crate::fk::{FkSolver, FkSolverConfig};
use crate::rig::{inverse_kinematics, CableLengths, Position, RigGeometry, NUM_CABLES};
use crate::sim::{CableMaterial, SimError, SimParams, SimScene};

pub const OBS_DIM: usize = 10;
pub const ACT_DIM: usize = NUM_CABLES;

/// The Table-I state: current cable lengths, current robot position,
/// target robot position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub current_lengths: CableLengths,
    pub current_position: Position,
    pub target_position: Position,
}

impl Observation {
    /// Raw 10-vector in meters.
    pub fn flatten(&self) -> [f64; OBS_DIM] {
        let l = &self.current_lengths.0;
        let p = self.current_position.0;
        let t = self.target_position.0;
        [l[0], l[1], l[2], l[3], p.x, p.y, p.z, t.x, t.y, t.z]
    }

    /// Normalized copy for the agent: lengths against the length bounds,
    /// positions per-axis against the workspace box, all mapped to
    /// [−1, 1]. The raw observation keeps the originals for reward math.
    pub fn normalized(&self, rig: &RigGeometry) -> [f64; OBS_DIM] {
        let (lo, hi) = rig.length_bounds();
        let norm_len = |l: f64| 2.0 * (l - lo) / (hi - lo) - 1.0;
        let wmin = rig.workspace_min();
        let wmax = rig.workspace_max();
        let norm_axis = |v: f64, a: usize| 2.0 * (v - wmin[a]) / (wmax[a] - wmin[a]) - 1.0;
        let l = &self.current_lengths.0;
        let p = self.current_position.0;
        let t = self.target_position.0;
        [
            norm_len(l[0]),
            norm_len(l[1]),
            norm_len(l[2]),
            norm_len(l[3]),
            norm_axis(p.x, 0),
            norm_axis(p.y, 1),
            norm_axis(p.z, 2),
            norm_axis(t.x, 0),
            norm_axis(t.y, 1),
            norm_axis(t.z, 2),
        ]
    }
}

/// Absolute commanded cable lengths [m]. Clamped into the rig's length
/// bounds before application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub lengths: CableLengths,
}

impl Action {
    pub fn new(lengths: CableLengths) -> Self {
        Action { lengths }
    }

    /// Decodes a normalized agent action in [−1, 1]⁴ to absolute lengths.
    pub fn from_normalized(normalized: &[f64; ACT_DIM], rig: &RigGeometry) -> Self {
        let (lo, hi) = rig.length_bounds();
        Action {
            lengths: CableLengths(std::array::from_fn(|i| {
                let a = normalized[i].clamp(-1.0, 1.0);
                lo + (a + 1.0) * 0.5 * (hi - lo)
            })),
        }
    }

    pub fn to_normalized(&self, rig: &RigGeometry) -> [f64; ACT_DIM] {
        let (lo, hi) = rig.length_bounds();
        std::array::from_fn(|i| (2.0 * (self.lengths[i] - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0))
    }
}

/// All reward terms of one step plus the quantities they were computed
/// from. Terms not active in a variant are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardTerms {
    pub r_step: f64,
    pub r_dist: f64,
    pub r_goal: f64,
    pub r_csag: f64,
    pub r_cact: f64,
    pub r_cdev: f64,
    pub r_full: f64,
    /// Distance to goal after the step [m].
    pub g_dist: f64,
    /// g_dist normalized by the workspace diagonal.
    pub d_norm: f64,
    /// Mean sag surplus over the four cables [m].
    pub c_diff_agg: f64,
    /// Mean commanded-change-to-goal-distance ratio.
    pub c_ratio: f64,
    /// Mean |IK(target) − commanded| over the four cables [m].
    pub a_diff_agg: f64,
}

/// No-sag reward stack: r_step + r_dist + r_goal.
pub fn reward_no_sag(g_dist: f64, d_norm: f64, goal_threshold: f64) -> RewardTerms {
    let r_step = 0.01;
    let r_dist = -f64::tanh(2.0 * (d_norm - 0.06)) + 0.002;
    let r_goal = if g_dist <= goal_threshold { 1.0 } else { 0.0 };
    RewardTerms {
        r_step,
        r_dist,
        r_goal,
        r_csag: 0.0,
        r_cact: 0.0,
        r_cdev: 0.0,
        r_full: r_step + r_dist + r_goal,
        g_dist,
        d_norm,
        c_diff_agg: 0.0,
        c_ratio: 0.0,
        a_diff_agg: 0.0,
    }
}

/// Sagging-environment reward stack: r_step + r_dist + r_csag + r_cact +
/// r_cdev, plus r_goal on success.
pub fn reward_carosim(
    g_dist: f64,
    d_norm: f64,
    c_diff_agg: f64,
    c_ratio: f64,
    a_diff_agg: f64,
    goal_threshold: f64,
) -> RewardTerms {
    let r_step = 0.01;
    let r_dist = -f64::tanh(2.0 * (d_norm - 0.06)) + 0.002;
    let r_csag = -f64::tanh(c_diff_agg * c_diff_agg + 0.09) * 0.7 - 0.035;
    let r_cact = -f64::tanh(c_ratio).powi(15) / 10.0;
    let r_cdev = -f64::tanh(a_diff_agg).powi(4) / 5.0;
    let r_goal = if g_dist <= goal_threshold { 1.0 } else { 0.0 };
    RewardTerms {
        r_step,
        r_dist,
        r_goal,
        r_csag,
        r_cact,
        r_cdev,
        r_full: r_step + r_dist + r_csag + r_cact + r_cdev + r_goal,
        g_dist,
        d_norm,
        c_diff_agg,
        c_ratio,
        a_diff_agg,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvVariant {
    NoSag,
    CaroSim,
}

impl std::fmt::Display for EnvVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnvVariant::NoSag => write!(f, "no_sag"),
            EnvVariant::CaroSim => write!(f, "carosim"),
        }
    }
}

impl std::str::FromStr for EnvVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "no_sag" | "nosag" | "no-sag" => Ok(EnvVariant::NoSag),
            "carosim" => Ok(EnvVariant::CaroSim),
            other => Err(format!("unknown env variant '{other}' (no_sag | carosim)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub max_steps_per_episode: usize,
    /// Success radius around the target [m].
    pub goal_threshold: f64,
    pub variant: EnvVariant,
    pub seed: u64,
    /// Physics steps simulated per environment step in the sagging
    /// variant (10 × dt 0.01 s = a 0.1 s control interval).
    pub steps_per_action: usize,
    /// Step budget when settling a freshly reset sagging scene.
    pub reset_settle_steps: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            max_steps_per_episode: 200,
            goal_threshold: 0.05,
            variant: EnvVariant::NoSag,
            seed: 0,
            steps_per_action: 10,
            reset_settle_steps: 1500,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.goal_threshold > 0.0) {
            return Err("goal_threshold must be > 0".into());
        }
        if self.max_steps_per_episode == 0 {
            return Err("max_steps_per_episode must be >= 1".into());
        }
        if self.steps_per_action == 0 {
            return Err("steps_per_action must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("environment was stepped before reset")]
    NotReset,
}

#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub obs: Observation,
    pub reward: RewardTerms,
    pub done: bool,
}

/// Common trait of the two environments; the training loop and the
/// tracking harness only see this surface.
pub trait Environment {
    /// Reseeds, samples a fresh start pose and target uniformly in the
    /// workspace, and returns the initial observation.
    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError>;
    /// Applies a (length-clamped) action and advances one control step.
    fn step(&mut self, action: &Action) -> Result<StepOutcome, EnvError>;
    fn rig(&self) -> &RigGeometry;
    fn config(&self) -> &EnvConfig;
    fn variant(&self) -> EnvVariant;
}

fn sample_workspace_point(rng: &mut ChaCha8Rng, rig: &RigGeometry) -> Position {
    let lo = rig.workspace_min();
    let hi = rig.workspace_max();
    Position::new(
        rng.gen_range(lo.x..=hi.x),
        rng.gen_range(lo.y..=hi.y),
        rng.gen_range(lo.z..=hi.z),
    )
}

/// Straight-line environment: actions resolve through the least-squares
/// FK model, no dynamics.
pub struct NoSagEnv {
    rig: RigGeometry,
    cfg: EnvConfig,
    fk: FkSolver,
    obs: Option<Observation>,
    step_count: usize,
}

impl NoSagEnv {
    pub fn new(rig: RigGeometry, cfg: EnvConfig) -> Self {
        NoSagEnv {
            rig,
            cfg,
            fk: FkSolver::new(FkSolverConfig::default()),
            obs: None,
            step_count: 0,
        }
    }
}

impl Environment for NoSagEnv {
    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = sample_workspace_point(&mut rng, &self.rig);
        let target = sample_workspace_point(&mut rng, &self.rig);
        self.fk.reset();
        self.step_count = 0;
        let obs = Observation {
            current_lengths: inverse_kinematics(start, &self.rig),
            current_position: start,
            target_position: target,
        };
        self.obs = Some(obs);
        Ok(obs)
    }

    fn step(&mut self, action: &Action) -> Result<StepOutcome, EnvError> {
        let prev = self.obs.ok_or(EnvError::NotReset)?;
        let (lengths, _) = self.rig.clamp_lengths(&action.lengths);
        // Warm-start from the current position; inconsistent lengths
        // resolve to their least-squares position within the workspace
        // box (a suspended platform cannot leave it upward anyway).
        let sol = self
            .fk
            .minimize_bounded(
                &lengths,
                &self.rig,
                Some(prev.current_position),
                (self.rig.workspace_min(), self.rig.workspace_max()),
            )
            .expect("clamped finite lengths");
        let position = sol.position;
        self.step_count += 1;

        let g_dist = position.distance(&prev.target_position);
        let d_norm = g_dist / self.rig.workspace_diagonal();
        let reward = reward_no_sag(g_dist, d_norm, self.cfg.goal_threshold);
        let done = g_dist <= self.cfg.goal_threshold
            || self.step_count >= self.cfg.max_steps_per_episode;

        let obs = Observation {
            current_lengths: lengths,
            current_position: position,
            target_position: prev.target_position,
        };
        self.obs = Some(obs);
        Ok(StepOutcome { obs, reward, done })
    }

    fn rig(&self) -> &RigGeometry {
        &self.rig
    }

    fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    fn variant(&self) -> EnvVariant {
        EnvVariant::NoSag
    }
}

/// Sagging environment backed by the XPBD scene.
pub struct CaroSimEnv {
    rig: RigGeometry,
    cfg: EnvConfig,
    params: SimParams,
    material: CableMaterial,
    scene: Option<SimScene>,
    target: Position,
    step_count: usize,
}

impl CaroSimEnv {
    pub fn new(
        rig: RigGeometry,
        cfg: EnvConfig,
        params: SimParams,
        material: CableMaterial,
    ) -> Self {
        CaroSimEnv {
            rig,
            cfg,
            params,
            material,
            scene: None,
            target: Position::new(0.0, 0.0, 0.0),
            step_count: 0,
        }
    }

    fn observation(&self) -> Observation {
        let scene = self.scene.as_ref().expect("scene present");
        Observation {
            current_lengths: scene.measured_cable_lengths(),
            current_position: scene.robot_position(),
            target_position: self.target,
        }
    }
}

impl Environment for CaroSimEnv {
    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = sample_workspace_point(&mut rng, &self.rig);
        self.target = sample_workspace_point(&mut rng, &self.rig);
        let mut scene = SimScene::build(&self.rig, &self.params, &self.material, start)?;
        scene.settle(self.cfg.reset_settle_steps)?;
        self.scene = Some(scene);
        self.step_count = 0;
        Ok(self.observation())
    }

    fn step(&mut self, action: &Action) -> Result<StepOutcome, EnvError> {
        if self.scene.is_none() {
            return Err(EnvError::NotReset);
        }
        let prev = self.observation();
        let (lengths, _) = self.rig.clamp_lengths(&action.lengths);
        let g_dist_pre = prev.current_position.distance(&self.target);

        let scene = self.scene.as_mut().expect("scene present");
        scene.set_commanded_lengths(&lengths);
        for _ in 0..self.cfg.steps_per_action {
            scene.step()?;
        }
        self.step_count += 1;

        let scene = self.scene.as_ref().expect("scene present");
        let position = scene.robot_position();
        let g_dist = position.distance(&self.target);
        let d_norm = g_dist / self.rig.workspace_diagonal();
        let c_diff_agg = scene.sag_deflection().iter().sum::<f64>() / NUM_CABLES as f64;
        // Action-shaping aggregates use decision-time quantities.
        let l_diff_mean = (0..NUM_CABLES)
            .map(|i| (lengths[i] - prev.current_lengths[i]).abs())
            .sum::<f64>()
            / NUM_CABLES as f64;
        let c_ratio = l_diff_mean / g_dist_pre.max(1e-3);
        let ik_target = inverse_kinematics(self.target, &self.rig);
        let a_diff_agg = (0..NUM_CABLES)
            .map(|i| (ik_target[i] - lengths[i]).abs())
            .sum::<f64>()
            / NUM_CABLES as f64;

        let reward = reward_carosim(
            g_dist,
            d_norm,
            c_diff_agg,
            c_ratio,
            a_diff_agg,
            self.cfg.goal_threshold,
        );
        let done = g_dist <= self.cfg.goal_threshold
            || self.step_count >= self.cfg.max_steps_per_episode;

        let obs = Observation {
            current_lengths: scene.measured_cable_lengths(),
            current_position: position,
            target_position: self.target,
        };
        Ok(StepOutcome { obs, reward, done })
    }

    fn rig(&self) -> &RigGeometry {
        &self.rig
    }

    fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    fn variant(&self) -> EnvVariant {
        EnvVariant::CaroSim
    }
}

/// Sweeps every reward term over its dependent variable and writes a
/// plot-ready CSV with columns `term,x,value`.
pub fn reward_shapes_report<W: Write>(out: &mut W) -> std::io::Result<()> {
    writeln!(out, "term,x,value")?;
    let n = 200;
    for k in 0..=n {
        let d = k as f64 / n as f64; // d_norm in [0,1]
        let r = reward_no_sag(d * 6.0, d, 0.05);
        writeln!(out, "r_dist,{d},{}", r.r_dist)?;
    }
    for k in 0..=n {
        let c = 3.0 * k as f64 / n as f64;
        let r = reward_carosim(1.0, 0.1, c, 0.0, 0.0, 0.05);
        writeln!(out, "r_csag,{c},{}", r.r_csag)?;
    }
    for k in 0..=n {
        let c = 3.0 * k as f64 / n as f64;
        let r = reward_carosim(1.0, 0.1, 0.0, c, 0.0, 0.05);
        writeln!(out, "r_cact,{c},{}", r.r_cact)?;
    }
    for k in 0..=n {
        let a = 3.0 * k as f64 / n as f64;
        let r = reward_carosim(1.0, 0.1, 0.0, 0.0, a, 0.05);
        writeln!(out, "r_cdev,{a},{}", r.r_cdev)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn r_dist_values() {
        // tanh(0) = 0 at the 0.06 offset
        assert_relative_eq!(reward_no_sag(0.36, 0.06, 0.05).r_dist, 0.002, epsilon = 1e-15);
        // frozen direct evaluations of the formula
        assert_relative_eq!(
            reward_no_sag(0.0, 0.0, 0.05).r_dist,
            0.12142729853438589,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            reward_no_sag(6.0, 1.0, 0.05).r_dist,
            -0.952492113074392,
            epsilon = 1e-12
        );
    }

    #[test]
    fn r_goal_boundary_inclusive() {
        assert_eq!(reward_no_sag(0.05, 0.008, 0.05).r_goal, 1.0);
        assert_eq!(reward_no_sag(0.05 + 1e-12, 0.008, 0.05).r_goal, 0.0);
        assert_eq!(reward_no_sag(0.0, 0.0, 0.05).r_goal, 1.0);
    }

    #[test]
    fn carosim_term_values() {
        let r = reward_carosim(1.0, 0.2, 0.0, 0.0, 0.0, 0.05);
        assert_relative_eq!(r.r_csag, -0.7 * f64::tanh(0.09) - 0.035, epsilon = 1e-15);
        assert_relative_eq!(r.r_csag, -0.09783044932301208, epsilon = 1e-12);
        assert_eq!(r.r_cact, 0.0);
        assert_eq!(r.r_cdev, 0.0);
        let r = reward_carosim(1.0, 0.2, 0.0, 0.0, 1.0, 0.05);
        assert_relative_eq!(r.r_cdev, -0.06728595287721649, epsilon = 1e-12);
    }

    #[test]
    fn r_full_is_sum_of_active_terms() {
        let r = reward_no_sag(0.3, 0.05, 0.05);
        assert_relative_eq!(r.r_full, r.r_step + r.r_dist + r.r_goal, epsilon = 1e-15);
        let r = reward_carosim(0.04, 0.0066, 0.01, 0.5, 0.2, 0.05);
        assert_eq!(r.r_goal, 1.0);
        assert_relative_eq!(
            r.r_full,
            r.r_step + r.r_dist + r.r_csag + r.r_cact + r.r_cdev + r.r_goal,
            epsilon = 1e-15
        );
        assert_eq!(r.r_step, 0.01);
    }

    #[test]
    fn observation_flatten_and_normalize() {
        let rig = RigGeometry::default();
        let obs = Observation {
            current_lengths: CableLengths([2.0, 3.0, 4.0, 5.0]),
            current_position: Position::new(0.0, 0.0, 1.0),
            target_position: Position::new(-2.0, 2.0, 0.0),
        };
        let flat = obs.flatten();
        assert_eq!(flat.len(), OBS_DIM);
        assert_eq!(flat[4..7], [0.0, 0.0, 1.0]);
        let norm = obs.normalized(&rig);
        for v in norm {
            assert!((-1.0..=1.0).contains(&v));
        }
        // workspace center maps to 0
        assert_eq!(norm[4], 0.0);
        assert_eq!(norm[6], 0.0);
        // boundary values map to the interval ends
        assert_eq!(norm[7], -1.0);
        assert_eq!(norm[8], 1.0);
    }

    #[test]
    fn action_normalize_roundtrip() {
        let rig = RigGeometry::default();
        let a = Action::new(CableLengths([2.0, 3.5, 5.25, 7.0]));
        let b = Action::from_normalized(&a.to_normalized(&rig), &rig);
        assert!(a.lengths.max_abs_diff(&b.lengths) < 1e-12);
        // out-of-range normalized values clamp to the bounds
        let c = Action::from_normalized(&[-2.0, 2.0, 0.0, 0.0], &rig);
        let (lo, hi) = rig.length_bounds();
        assert_eq!(c.lengths[0], lo);
        assert_eq!(c.lengths[1], hi);
    }

    #[test]
    fn no_sag_reset_deterministic_and_in_workspace() {
        let rig = RigGeometry::default();
        let mut env = NoSagEnv::new(rig.clone(), EnvConfig::default());
        let a = env.reset(123).unwrap();
        let b = env.reset(123).unwrap();
        assert_eq!(a, b);
        for seed in 0..1000u64 {
            let obs = env.reset(seed).unwrap();
            assert!(rig.contains(&obs.current_position));
            assert!(rig.contains(&obs.target_position));
        }
    }

    #[test]
    fn no_sag_ik_action_reaches_goal() {
        let rig = RigGeometry::default();
        let mut env = NoSagEnv::new(rig.clone(), EnvConfig::default());
        let obs = env.reset(7).unwrap();
        let action = Action::new(inverse_kinematics(obs.target_position, &rig));
        let out = env.step(&action).unwrap();
        assert!(out.done);
        assert_eq!(out.reward.r_goal, 1.0);
        assert!(out.reward.g_dist <= 0.05);
        assert_eq!(out.obs.flatten().len(), 10);
    }

    #[test]
    fn step_budget_is_respected() {
        let rig = RigGeometry::default();
        let cfg = EnvConfig {
            max_steps_per_episode: 5,
            ..EnvConfig::default()
        };
        let mut env = NoSagEnv::new(rig.clone(), cfg);
        env.reset(1).unwrap();
        // command a far-away corner so the goal is never met
        let action = Action::new(inverse_kinematics(Position::new(2.0, 2.0, 2.0), &rig));
        let mut steps = 0;
        loop {
            steps += 1;
            let out = env.step(&action).unwrap();
            if out.done {
                break;
            }
            assert!(steps <= 5);
        }
        assert_eq!(steps, 5);
    }

    #[test]
    fn episode_rewards_reproducible() {
        let rig = RigGeometry::default();
        let mut env = NoSagEnv::new(rig.clone(), EnvConfig::default());
        let actions: Vec<Action> = (0..10)
            .map(|i| {
                Action::from_normalized(
                    &std::array::from_fn(|j| ((i * 4 + j) as f64 * 0.37).sin()),
                    &rig,
                )
            })
            .collect();
        let run = |env: &mut NoSagEnv| -> Vec<f64> {
            env.reset(99).unwrap();
            actions
                .iter()
                .map(|a| env.step(a).unwrap().reward.r_full)
                .collect()
        };
        let r1 = run(&mut env);
        let r2 = run(&mut env);
        assert_eq!(r1, r2);
    }

    #[test]
    fn carosim_reset_measured_at_least_chord() {
        let rig = RigGeometry::default();
        let cfg = EnvConfig {
            variant: EnvVariant::CaroSim,
            max_steps_per_episode: 30,
            reset_settle_steps: 600,
            ..EnvConfig::default()
        };
        let mut env = CaroSimEnv::new(
            rig.clone(),
            cfg,
            SimParams::default(),
            CableMaterial::default(),
        );
        let obs = env.reset(5).unwrap();
        let chords = inverse_kinematics(obs.current_position, &rig);
        for i in 0..4 {
            assert!(obs.current_lengths[i] >= chords[i] - 1e-6);
        }
    }

    #[test]
    fn carosim_step_runs_and_rewards_are_finite() {
        let rig = RigGeometry::default();
        let cfg = EnvConfig {
            variant: EnvVariant::CaroSim,
            max_steps_per_episode: 30,
            reset_settle_steps: 300,
            ..EnvConfig::default()
        };
        let mut env = CaroSimEnv::new(
            rig.clone(),
            cfg,
            SimParams::default(),
            CableMaterial::default(),
        );
        let obs = env.reset(17).unwrap();
        let action = Action::new(inverse_kinematics(obs.target_position, &rig));
        let out = env.step(&action).unwrap();
        assert!(out.reward.r_full.is_finite());
        assert!(out.reward.r_csag <= -0.09 && out.reward.r_csag > -0.735);
        assert!(out.reward.c_diff_agg >= -1e-6);
    }

    #[test]
    fn reward_report_sweeps() {
        let mut buf = Vec::new();
        reward_shapes_report(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut r_dist_vals = Vec::new();
        let mut r_cact_vals = Vec::new();
        let mut r_cdev_vals = Vec::new();
        for line in text.lines().skip(1) {
            let mut parts = line.split(',');
            let term = parts.next().unwrap();
            let _x: f64 = parts.next().unwrap().parse().unwrap();
            let v: f64 = parts.next().unwrap().parse().unwrap();
            match term {
                "r_dist" => r_dist_vals.push(v),
                "r_cact" => r_cact_vals.push(v),
                "r_cdev" => r_cdev_vals.push(v),
                _ => {}
            }
        }
        // r_dist strictly decreasing over d_norm in [0,1]
        assert!(r_dist_vals.windows(2).all(|w| w[1] < w[0]));
        // r_cact non-increasing, bounded below by -0.1
        assert!(r_cact_vals.windows(2).all(|w| w[1] <= w[0]));
        assert!(r_cact_vals.iter().all(|v| *v > -0.1 && *v <= 0.0));
        // r_cdev bounded below by -0.2
        assert!(r_cdev_vals.iter().all(|v| *v > -0.2 && *v <= 0.0));
    }

    proptest! {
        /// r_dist strictly decreasing; the stated bounds hold.
        #[test]
        fn r_dist_monotone_and_bounded(a in 0.0..1.0f64, b in 0.0..1.0f64) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            let r_lo = reward_no_sag(lo * 6.0, lo, 0.05).r_dist;
            let r_hi = reward_no_sag(hi * 6.0, hi, 0.05).r_dist;
            prop_assert!(r_hi < r_lo);
            prop_assert!(r_lo > -0.998 && r_lo < 1.002);
        }

        /// r_csag strictly decreasing in |c_diff| over the physical sag
        /// range (tanh saturates past it in f64); bounds hold.
        #[test]
        fn r_csag_monotone_and_bounded(a in 0.0..3.0f64, b in 0.0..3.0f64) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let r_lo = reward_carosim(1.0, 0.1, lo, 0.0, 0.0, 0.05).r_csag;
            let r_hi = reward_carosim(1.0, 0.1, hi, 0.0, 0.0, 0.05).r_csag;
            prop_assert!(r_hi < r_lo);
            prop_assert!(r_lo > -0.735 && r_lo <= -0.0978);
        }

        /// d_norm stays in [0,1] for any two workspace points.
        #[test]
        fn d_norm_in_unit_interval(
            px in -2.0..2.0, py in -2.0..2.0, pz in 0.0..2.0,
            tx in -2.0..2.0, ty in -2.0..2.0, tz in 0.0..2.0,
        ) {
            let rig = RigGeometry::default();
            let g = Position::new(px, py, pz).distance(&Position::new(tx, ty, tz));
            let d = g / rig.workspace_diagonal();
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}
