//! Forward kinematics by damped least squares.
//!
//! Finds the platform position `p*` minimizing the residual
//! `E(p) = Σ_i (‖(p + o_i) − a_i‖ − L_i)²` with a Levenberg-Marquardt
//! iteration on the 4×3 residual Jacobian. Four cable lengths
//! overdetermine a 3-dof position, so `E(p*)` is exactly zero only for
//! kinematically consistent lengths; [`FkSolver::minimize`] returns the
//! least-squares minimizer either way, while [`FkSolver::solve`] demands
//! `E(p*) ≤ residual_tolerance` and reports [`FkError::NonConvergence`]
//! otherwise.

use nalgebra::{Matrix3, Vector3, Vector4};
use thiserror::Error;

use crate::rig::{fk_residual, CableLengths, Position, RigGeometry, NUM_CABLES};

/// How the solver picks a starting point when the caller passes no guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    /// Always start from the workspace center.
    WorkspaceCenter,
    /// Start from the previous solution, falling back to the workspace
    /// center on the first call (the tracking-friendly default).
    PreviousSolution,
    /// The caller supplies the guess on every call.
    CallerSupplied,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkSolverConfig {
    pub max_iterations: usize,
    /// Residual E(p) below which consistent lengths count as solved [m²].
    pub residual_tolerance: f64,
    /// Step norm below which the iteration is considered stationary [m].
    pub step_tolerance: f64,
    pub initial_guess: InitialGuess,
}

impl Default for FkSolverConfig {
    fn default() -> Self {
        FkSolverConfig {
            max_iterations: 200,
            residual_tolerance: 1e-12,
            step_tolerance: 1e-9,
            initial_guess: InitialGuess::PreviousSolution,
        }
    }
}

impl FkSolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_iterations < 1 {
            return Err("fk max_iterations must be >= 1".into());
        }
        if !(self.residual_tolerance > 0.0) || !(self.step_tolerance > 0.0) {
            return Err("fk tolerances must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum FkError {
    #[error("forward kinematics did not converge: residual {residual:.3e} m^2 after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },
    #[error("invalid forward-kinematics input: {0}")]
    InvalidInput(&'static str),
}

/// Outcome of a least-squares minimization.
#[derive(Debug, Clone, Copy)]
pub struct FkSolution {
    pub position: Position,
    /// E(position) [m²].
    pub residual: f64,
    pub iterations: usize,
    /// Whether the iteration reached a stationary point (step below
    /// `step_tolerance`) or the residual tolerance before the iteration
    /// budget ran out.
    pub stationary: bool,
}

/// Stateful FK solver; holds the previous solution for warm starts.
/// One handle per thread of use.
#[derive(Debug, Clone)]
pub struct FkSolver {
    cfg: FkSolverConfig,
    previous: Option<Vector3<f64>>,
}

impl FkSolver {
    pub fn new(cfg: FkSolverConfig) -> Self {
        FkSolver { cfg, previous: None }
    }

    pub fn config(&self) -> &FkSolverConfig {
        &self.cfg
    }

    /// Forgets the previous solution.
    pub fn reset(&mut self) {
        self.previous = None;
    }

    fn start_point(
        &self,
        rig: &RigGeometry,
        guess: Option<Position>,
    ) -> Result<Vector3<f64>, FkError> {
        let p = match self.cfg.initial_guess {
            InitialGuess::WorkspaceCenter => rig.workspace_center().0,
            InitialGuess::PreviousSolution => match guess {
                Some(g) => g.0,
                None => self.previous.unwrap_or(rig.workspace_center().0),
            },
            InitialGuess::CallerSupplied => guess
                .ok_or(FkError::InvalidInput("caller_supplied policy requires a guess"))?
                .0,
        };
        if !p.iter().all(|c| c.is_finite()) {
            return Err(FkError::InvalidInput("non-finite initial guess"));
        }
        Ok(p)
    }

    /// Strict forward kinematics: returns `p*` with `E(p*) ≤
    /// residual_tolerance`, or [`FkError::NonConvergence`] when the
    /// lengths are inconsistent (e.g. mutually unreachable) or the
    /// iteration stalls above tolerance.
    pub fn solve(
        &mut self,
        lengths: &CableLengths,
        rig: &RigGeometry,
        guess: Option<Position>,
    ) -> Result<Position, FkError> {
        let sol = self.minimize(lengths, rig, guess)?;
        if sol.residual <= self.cfg.residual_tolerance {
            Ok(sol.position)
        } else {
            Err(FkError::NonConvergence {
                residual: sol.residual,
                iterations: sol.iterations,
            })
        }
    }

    /// Least-squares forward kinematics: returns the minimizer of E even
    /// when the lengths are inconsistent and no exact position exists.
    pub fn minimize(
        &mut self,
        lengths: &CableLengths,
        rig: &RigGeometry,
        guess: Option<Position>,
    ) -> Result<FkSolution, FkError> {
        self.minimize_impl(lengths, rig, guess, None)
    }

    /// Box-constrained least squares: iterates are projected into
    /// `[lo, hi]` after every step. This is the entry point the
    /// environments and tracking use — four commanded lengths generally
    /// overdetermine the position, and the unconstrained minimizer of an
    /// arbitrary length tuple may lie in the mirror branch above the
    /// anchors, where no suspended platform can be.
    pub fn minimize_bounded(
        &mut self,
        lengths: &CableLengths,
        rig: &RigGeometry,
        guess: Option<Position>,
        bounds: (Vector3<f64>, Vector3<f64>),
    ) -> Result<FkSolution, FkError> {
        self.minimize_impl(lengths, rig, guess, Some(bounds))
    }

    fn minimize_impl(
        &mut self,
        lengths: &CableLengths,
        rig: &RigGeometry,
        guess: Option<Position>,
        bounds: Option<(Vector3<f64>, Vector3<f64>)>,
    ) -> Result<FkSolution, FkError> {
        if !lengths.is_finite() {
            return Err(FkError::InvalidInput("non-finite cable length"));
        }
        if lengths.iter().any(|l| l < 0.0) {
            return Err(FkError::InvalidInput("negative cable length"));
        }
        let project = |v: Vector3<f64>| match bounds {
            Some((lo, hi)) => Vector3::new(
                v.x.clamp(lo.x, hi.x),
                v.y.clamp(lo.y, hi.y),
                v.z.clamp(lo.z, hi.z),
            ),
            None => v,
        };
        let mut p = project(self.start_point(rig, guess)?);
        let mut e = fk_residual(Position(p), lengths, rig);
        let mut lambda = 1e-3;
        let mut iterations = 0;
        let mut stationary = false;

        while iterations < self.cfg.max_iterations {
            iterations += 1;
            if e <= self.cfg.residual_tolerance {
                stationary = true;
                break;
            }
            let (jtj, jtr) = normal_equations(p, lengths, rig);
            // Damped step (JᵀJ + λI) δ = −Jᵀr, projected into the box;
            // a candidate counts only if it actually lowers E.
            let mut step = None;
            for _ in 0..25 {
                let damped = jtj + Matrix3::identity() * lambda;
                match damped.lu().solve(&(-jtr)) {
                    Some(delta) if delta.iter().all(|c| c.is_finite()) => {
                        let candidate = project(p + delta);
                        let e_new = fk_residual(Position(candidate), lengths, rig);
                        if e_new < e {
                            let step_norm = (candidate - p).norm();
                            step = Some((candidate, e_new, step_norm));
                            lambda = (lambda / 3.0).max(1e-12);
                            break;
                        }
                    }
                    _ => {}
                }
                lambda *= 10.0;
                if lambda > 1e12 {
                    break;
                }
            }
            match step {
                Some((candidate, e_new, step_norm)) => {
                    p = candidate;
                    e = e_new;
                    if step_norm < self.cfg.step_tolerance {
                        stationary = true;
                        break;
                    }
                }
                None => {
                    // No damping produced descent: we are at a stationary
                    // point up to floating-point resolution.
                    stationary = true;
                    break;
                }
            }
        }

        if !p.iter().all(|c| c.is_finite()) || !e.is_finite() {
            return Err(FkError::InvalidInput("iteration produced non-finite state"));
        }
        self.previous = Some(p);
        Ok(FkSolution {
            position: Position(p),
            residual: e,
            iterations,
            stationary,
        })
    }
}

/// One-shot strict forward kinematics (fresh solver, no warm start).
pub fn forward_kinematics(
    lengths: &CableLengths,
    rig: &RigGeometry,
    cfg: &FkSolverConfig,
    guess: Option<Position>,
) -> Result<Position, FkError> {
    FkSolver::new(*cfg).solve(lengths, rig, guess)
}

/// JᵀJ and Jᵀr for the residuals r_i(p) = ‖(p + o_i) − a_i‖ − L_i, whose
/// Jacobian rows are the unit vectors from each anchor to its attachment.
fn normal_equations(
    p: Vector3<f64>,
    lengths: &CableLengths,
    rig: &RigGeometry,
) -> (Matrix3<f64>, Vector3<f64>) {
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    let mut residuals = Vector4::zeros();
    for i in 0..NUM_CABLES {
        let d = p + rig.offsets()[i] - rig.anchors()[i];
        let dist = d.norm();
        residuals[i] = dist - lengths[i];
        if dist > 1e-12 {
            let u = d / dist;
            jtj += u * u.transpose();
            jtr += u * residuals[i];
        }
    }
    (jtj, jtr)
}
