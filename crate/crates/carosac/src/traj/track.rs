//! Closed-loop trajectory tracking: a controller maps the next reference
//! point to commanded cable lengths and the environment physics resolve
//! them into achieved positions.

use super::spline::Trajectory;
use super::TrajError;
use crate::envs::{Action, EnvVariant, Observation};
use crate::fk::{FkSolver, FkSolverConfig};
use crate::rig::{inverse_kinematics, CableLengths, Position, RigGeometry};
use crate::sim::{CableMaterial, SimParams, SimScene};
use crate::td3::Td3Agent;

/// The two controllers compared by the evaluation harness.
pub enum Controller {
    /// Straight-line inverse kinematics of the reference point.
    IkBaseline,
    /// A trained policy run deterministically (no exploration noise).
    RlAgent(Td3Agent),
}

impl Controller {
    fn command(
        &self,
        current_lengths: CableLengths,
        current_position: Position,
        target: Position,
        rig: &RigGeometry,
    ) -> CableLengths {
        match self {
            Controller::IkBaseline => inverse_kinematics(target, rig),
            Controller::RlAgent(agent) => {
                let obs = Observation {
                    current_lengths,
                    current_position,
                    target_position: target,
                };
                let a = agent.select_action(&obs.normalized(rig), None);
                Action::from_normalized(&a, rig).lengths
            }
        }
    }
}

/// Time series of one tracking run. All series share the same length;
/// `reference` is absent when replaying a length log without reference
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingRecord {
    pub t: Vec<f64>,
    pub reference: Option<Vec<Position>>,
    pub achieved: Vec<Position>,
    pub commanded: Vec<CableLengths>,
    pub measured: Vec<CableLengths>,
    /// False when the run aborted early (divergence).
    pub complete: bool,
    pub divergence: Option<String>,
}

impl TrackingRecord {
    pub fn len(&self) -> usize {
        self.achieved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.achieved.is_empty()
    }

    pub(super) fn push(
        &mut self,
        t: f64,
        reference: Option<Position>,
        achieved: Position,
        commanded: CableLengths,
        measured: CableLengths,
    ) {
        self.t.push(t);
        if let (Some(refs), Some(r)) = (self.reference.as_mut(), reference) {
            refs.push(r);
        }
        self.achieved.push(achieved);
        self.commanded.push(commanded);
        self.measured.push(measured);
    }

    pub(super) fn empty(with_reference: bool) -> Self {
        TrackingRecord {
            t: Vec::new(),
            reference: with_reference.then(Vec::new),
            achieved: Vec::new(),
            commanded: Vec::new(),
            measured: Vec::new(),
            complete: true,
            divergence: None,
        }
    }
}

/// Physics configuration for tracking in the sagging environment (the
/// no-sag variant ignores it).
#[derive(Debug, Clone, Copy)]
pub struct TrackOptions {
    pub sim_params: SimParams,
    pub material: CableMaterial,
    /// Settling budget before the run starts (sagging variant).
    pub settle_steps: usize,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            sim_params: SimParams::default(),
            material: CableMaterial::default(),
            settle_steps: 1500,
        }
    }
}

/// Runs the controller along the trajectory with one-step preview: at
/// sample k the controller sees reference point k as its target. On
/// divergence the partial record is returned with `complete = false`.
pub fn track(
    controller: &Controller,
    variant: EnvVariant,
    rig: &RigGeometry,
    traj: &Trajectory,
    opts: &TrackOptions,
) -> Result<TrackingRecord, TrajError> {
    if traj.is_empty() {
        return Err(TrajError::EmptyRecord);
    }
    match variant {
        EnvVariant::NoSag => track_no_sag(controller, rig, traj),
        EnvVariant::CaroSim => track_carosim(controller, rig, traj, opts),
    }
}

fn track_no_sag(
    controller: &Controller,
    rig: &RigGeometry,
    traj: &Trajectory,
) -> Result<TrackingRecord, TrajError> {
    let mut record = TrackingRecord::empty(true);
    let mut fk = FkSolver::new(FkSolverConfig::default());
    let mut position = traj.samples[0].p;
    let mut lengths = inverse_kinematics(position, rig);
    for sample in &traj.samples {
        let cmd = controller.command(lengths, position, sample.p, rig);
        let (cmd, _) = rig.clamp_lengths(&cmd);
        let sol = fk
            .minimize_bounded(
                &cmd,
                rig,
                Some(position),
                (rig.workspace_min(), rig.workspace_max()),
            )
            .expect("clamped lengths are finite");
        position = sol.position;
        lengths = cmd;
        record.push(
            sample.t,
            Some(sample.p),
            position,
            cmd,
            inverse_kinematics(position, rig),
        );
    }
    Ok(record)
}

fn track_carosim(
    controller: &Controller,
    rig: &RigGeometry,
    traj: &Trajectory,
    opts: &TrackOptions,
) -> Result<TrackingRecord, TrajError> {
    let mut record = TrackingRecord::empty(true);
    let mut scene = SimScene::build(rig, &opts.sim_params, &opts.material, traj.samples[0].p)?;
    scene.settle(opts.settle_steps)?;
    let steps_per_sample = ((traj.dt / opts.sim_params.dt).round() as usize).max(1);
    for sample in &traj.samples {
        let cmd = controller.command(
            scene.measured_cable_lengths(),
            scene.robot_position(),
            sample.p,
            rig,
        );
        let (cmd, _) = rig.clamp_lengths(&cmd);
        scene.set_commanded_lengths(&cmd);
        for _ in 0..steps_per_sample {
            if let Err(e) = scene.step() {
                record.complete = false;
                record.divergence = Some(e.to_string());
                return Ok(record);
            }
        }
        record.push(
            sample.t,
            Some(sample.p),
            scene.robot_position(),
            cmd,
            scene.measured_cable_lengths(),
        );
    }
    Ok(record)
}
