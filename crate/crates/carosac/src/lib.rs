//! Toolkit for a 4-cable suspended cable-driven parallel robot (CDPR):
//! straight-line and sag-aware simulation, reinforcement-learning
//! environments, a TD3 position controller, and a trajectory-tracking
//! evaluation harness.

pub mod envs;
pub mod td3;
pub mod traj;
pub mod fk;
pub mod rig;
pub mod sim;

pub use envs::{Action, EnvConfig, EnvVariant, Environment, Observation, RewardTerms};
pub use fk::{forward_kinematics, FkError, FkSolution, FkSolver, FkSolverConfig, InitialGuess};
pub use rig::{fk_residual, inverse_kinematics, CableLengths, Position, RigError, RigGeometry};
pub use sim::{CableMaterial, SimError, SimParams, SimScene, StepInfo};
