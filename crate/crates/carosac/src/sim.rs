//! Sagging-cable physics: XPBD particle cables, a point-mass platform,
//! gravity, and rate-limited cable-length actuation.
//!
//! Each cable is a chain of particles with the first particle pinned at
//! its anchor and the last particle identified with the platform
//! attachment point `P + o_i` (so the attachment coupling is exact by
//! construction and the platform participates in the last segment's
//! projection through its own inverse mass). Distance constraints carry
//! XPBD compliance `α̃ = α/h²` with `α = compliance · segment rest
//! length`, i.e. compliance is per unit length and segments in series add
//! up to the cable's total compliance.
//!
//! On top of the chain, every cable carries one unilateral long-range
//! tether `‖(P + o_i) − a_i‖ ≤ rest_length` between the platform and the
//! anchor. The chain itself implies this bound (a polyline of total
//! length `rest` has chord ≤ `rest`), so the tether adds no statics of
//! its own; it transmits the platform's weight to the anchor directly,
//! which sequential projection cannot do across the huge
//! platform-to-particle mass ratio. A slack, sagging cable leaves its
//! tether inactive.

use nalgebra::Vector3;
use thiserror::Error;

use crate::rig::{inverse_kinematics, CableLengths, Position, RigGeometry, NUM_CABLES};

/// Cable material parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableMaterial {
    /// Mass per unit length [kg/m].
    pub linear_mass: f64,
    /// Inverse stiffness per unit-length distance constraint [m/N].
    pub compliance: f64,
    /// Per-step velocity retention factor in [0, 1]; 1 keeps all
    /// velocity, smaller values damp harder.
    pub damping: f64,
}

impl Default for CableMaterial {
    fn default() -> Self {
        CableMaterial {
            linear_mass: 0.01055,
            compliance: 1e-8,
            damping: 0.98,
        }
    }
}

impl CableMaterial {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.linear_mass > 0.0) {
            return Err("linear_mass must be > 0".into());
        }
        if !(self.compliance >= 0.0) {
            return Err("compliance must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.damping) {
            return Err("damping must be in [0, 1]".into());
        }
        Ok(())
    }
}

/// Solver and world parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub particles_per_cable: usize,
    pub substeps: usize,
    pub constraint_iterations: usize,
    /// Outer step size [s].
    pub dt: f64,
    /// Gravity [m/s²].
    pub gravity: Vector3<f64>,
    /// Platform (robot + payload) mass [kg].
    pub robot_mass: f64,
    /// Winch rate limit on rest-length changes [m/s].
    pub actuation_rate_limit: f64,
    /// Speed above which the state counts as numerically diverged [m/s].
    pub max_speed: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            particles_per_cable: 20,
            substeps: 4,
            constraint_iterations: 10,
            dt: 0.01,
            gravity: Vector3::new(0.0, 0.0, -9.81),
            robot_mass: 23.655,
            actuation_rate_limit: 2.5,
            max_speed: 100.0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.particles_per_cable < 3 {
            return Err("particles_per_cable must be >= 3".into());
        }
        if self.substeps < 1 {
            return Err("substeps must be >= 1".into());
        }
        if self.constraint_iterations < 1 {
            return Err("constraint_iterations must be >= 1".into());
        }
        if !(self.dt > 0.0) {
            return Err("dt must be > 0".into());
        }
        if !(self.robot_mass > 0.0) {
            return Err("robot_mass must be > 0".into());
        }
        if !(self.actuation_rate_limit > 0.0) {
            return Err("actuation_rate_limit must be > 0".into());
        }
        if !(self.max_speed > 0.0) {
            return Err("max_speed must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid initial position: {0}")]
    InvalidInitialPosition(String),
    #[error("numerical divergence: {0}")]
    NumericalDivergence(String),
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    /// Largest absolute constraint violation after the final substep [m].
    pub constraint_residual_max: f64,
    /// Whether the most recent [`SimScene::set_commanded_lengths`] call
    /// had to clamp its targets into the length bounds.
    pub clamped: bool,
}

#[derive(Debug, Clone)]
struct Cable {
    /// Particle positions; `[0]` is the pinned anchor, the last element
    /// mirrors the platform attachment point.
    positions: Vec<Vector3<f64>>,
    velocities: Vec<Vector3<f64>>,
    prev: Vec<Vector3<f64>>,
    inv_mass: Vec<f64>,
    /// Commanded arc length the winch has currently paid out [m].
    rest_length: f64,
    /// Where the winch is heading [m].
    target_length: f64,
    /// XPBD multipliers: one per segment plus one for the tether.
    lambdas: Vec<f64>,
}

impl Cable {
    fn segments(&self) -> usize {
        self.positions.len() - 1
    }

    fn measured_length(&self) -> f64 {
        self.positions
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .sum()
    }

    fn refresh_masses(&mut self, linear_mass: f64) {
        let n = self.positions.len();
        let particle_mass = linear_mass * self.rest_length / self.segments() as f64;
        let w = 1.0 / particle_mass;
        for i in 1..n - 1 {
            self.inv_mass[i] = w;
        }
    }
}

/// The simulated world: four XPBD cables and the platform point mass.
#[derive(Debug, Clone)]
pub struct SimScene {
    rig: RigGeometry,
    params: SimParams,
    material: CableMaterial,
    cables: Vec<Cable>,
    platform_pos: Vector3<f64>,
    platform_vel: Vector3<f64>,
    clamped: bool,
}

impl SimScene {
    /// Builds the scene with straight cables from the anchors to the
    /// platform attachments and rest lengths equal to the chords.
    pub fn build(
        rig: &RigGeometry,
        params: &SimParams,
        material: &CableMaterial,
        initial_position: Position,
    ) -> Result<Self, SimError> {
        params.validate().map_err(SimError::InvalidParams)?;
        material.validate().map_err(SimError::InvalidParams)?;
        if !initial_position.is_finite() || !rig.contains(&initial_position) {
            return Err(SimError::InvalidInitialPosition(format!(
                "{:?} is outside the workspace",
                initial_position.0
            )));
        }
        let lengths = inverse_kinematics(initial_position, rig);
        let (lo, hi) = rig.length_bounds();
        if lengths.iter().any(|l| l < lo || l > hi) {
            return Err(SimError::InvalidInitialPosition(format!(
                "IK lengths {:?} outside length bounds",
                lengths.0
            )));
        }

        let n = params.particles_per_cable;
        let mut cables = Vec::with_capacity(NUM_CABLES);
        for i in 0..NUM_CABLES {
            let anchor = rig.anchors()[i];
            let attach = initial_position.0 + rig.offsets()[i];
            let positions: Vec<_> = (0..n)
                .map(|k| anchor + (attach - anchor) * (k as f64 / (n - 1) as f64))
                .collect();
            let mut cable = Cable {
                velocities: vec![Vector3::zeros(); n],
                prev: positions.clone(),
                inv_mass: vec![0.0; n],
                positions,
                rest_length: lengths[i],
                target_length: lengths[i],
                lambdas: vec![0.0; n], // n-1 segments + 1 tether
            };
            cable.refresh_masses(material.linear_mass);
            cables.push(cable);
        }

        Ok(SimScene {
            rig: rig.clone(),
            params: *params,
            material: *material,
            cables,
            platform_pos: initial_position.0,
            platform_vel: Vector3::zeros(),
            clamped: false,
        })
    }

    pub fn rig(&self) -> &RigGeometry {
        &self.rig
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn material(&self) -> &CableMaterial {
        &self.material
    }

    /// Platform center.
    pub fn robot_position(&self) -> Position {
        Position(self.platform_pos)
    }

    pub fn platform_velocity(&self) -> Vector3<f64> {
        self.platform_vel
    }

    /// Arc lengths the winches have currently paid out.
    pub fn rest_lengths(&self) -> CableLengths {
        CableLengths(std::array::from_fn(|i| self.cables[i].rest_length))
    }

    pub fn target_lengths(&self) -> CableLengths {
        CableLengths(std::array::from_fn(|i| self.cables[i].target_length))
    }

    /// Per cable, the summed inter-particle segment distances.
    pub fn measured_cable_lengths(&self) -> CableLengths {
        CableLengths(std::array::from_fn(|i| self.cables[i].measured_length()))
    }

    /// Straight anchor-to-attachment distances.
    pub fn chord_lengths(&self) -> CableLengths {
        CableLengths(std::array::from_fn(|i| {
            (self.platform_pos + self.rig.offsets()[i] - self.rig.anchors()[i]).norm()
        }))
    }

    /// Per cable, measured length minus chord — the sag surplus.
    pub fn sag_deflection(&self) -> [f64; NUM_CABLES] {
        let measured = self.measured_cable_lengths();
        let chords = self.chord_lengths();
        std::array::from_fn(|i| measured[i] - chords[i])
    }

    /// Particle positions of cable `i` (first entry is the anchor, last
    /// the platform attachment).
    pub fn cable_particles(&self, i: usize) -> &[Vector3<f64>] {
        &self.cables[i].positions
    }

    /// Updates winch targets, clamping into the length bounds. The clamp
    /// flag shows up in subsequent [`StepInfo`]s.
    pub fn set_commanded_lengths(&mut self, targets: &CableLengths) {
        let (clamped_targets, clamped) = self.rig.clamp_lengths(targets);
        for (cable, t) in self.cables.iter_mut().zip(clamped_targets.iter()) {
            cable.target_length = t;
        }
        self.clamped = clamped;
    }

    /// Largest particle or platform speed [m/s].
    pub fn max_speed(&self) -> f64 {
        let mut v = self.platform_vel.norm();
        for cable in &self.cables {
            let n = cable.positions.len();
            for k in 1..n - 1 {
                v = v.max(cable.velocities[k].norm());
            }
        }
        v
    }

    /// Total kinetic energy of interior particles and platform [J].
    pub fn kinetic_energy(&self) -> f64 {
        let mut e = 0.5 * self.params.robot_mass * self.platform_vel.norm_squared();
        for cable in &self.cables {
            let n = cable.positions.len();
            for k in 1..n - 1 {
                if cable.inv_mass[k] > 0.0 {
                    e += 0.5 / cable.inv_mass[k] * cable.velocities[k].norm_squared();
                }
            }
        }
        e
    }

    /// Advances one `dt`.
    pub fn step(&mut self) -> Result<StepInfo, SimError> {
        // Winch actuation: move rest lengths toward targets at the rate
        // limit, then redistribute cable mass over the new arc length.
        let max_delta = self.params.actuation_rate_limit * self.params.dt;
        for cable in &mut self.cables {
            let delta = (cable.target_length - cable.rest_length).clamp(-max_delta, max_delta);
            if delta != 0.0 {
                cable.rest_length += delta;
                cable.refresh_masses(self.material.linear_mass);
            }
        }

        let h = self.params.dt / self.params.substeps as f64;
        let gravity = self.params.gravity;
        let platform_w = 1.0 / self.params.robot_mass;
        let mut residual_max = 0.0;

        for _ in 0..self.params.substeps {
            // Predict.
            for cable in &mut self.cables {
                let n = cable.positions.len();
                for k in 1..n - 1 {
                    cable.velocities[k] += gravity * h;
                    cable.prev[k] = cable.positions[k];
                    cable.positions[k] += cable.velocities[k] * h;
                }
            }
            self.platform_vel += gravity * h;
            let platform_prev = self.platform_pos;
            self.platform_pos += self.platform_vel * h;

            for cable in &mut self.cables {
                cable.lambdas.iter_mut().for_each(|l| *l = 0.0);
            }

            residual_max = 0.0;
            for iter in 0..self.params.constraint_iterations {
                let last = iter + 1 == self.params.constraint_iterations;
                let r = project_constraints(
                    &mut self.cables,
                    &mut self.platform_pos,
                    platform_w,
                    &self.rig,
                    &self.material,
                    h,
                );
                if last {
                    residual_max = r;
                }
            }

            // Mirror the platform attachment into each cable's last slot
            // and derive velocities from the position deltas.
            for (i, cable) in self.cables.iter_mut().enumerate() {
                let n = cable.positions.len();
                cable.positions[n - 1] = self.platform_pos + self.rig.offsets()[i];
                for k in 1..n - 1 {
                    cable.velocities[k] = (cable.positions[k] - cable.prev[k]) / h;
                }
            }
            self.platform_vel = (self.platform_pos - platform_prev) / h;
        }

        // Per-step velocity damping.
        let damping = self.material.damping;
        for cable in &mut self.cables {
            let n = cable.positions.len();
            for k in 1..n - 1 {
                cable.velocities[k] *= damping;
            }
        }
        self.platform_vel *= damping;

        self.check_divergence()?;
        Ok(StepInfo {
            constraint_residual_max: residual_max,
            clamped: self.clamped,
        })
    }

    /// Steps until the peak speed stays below 1e-4 m/s for 50 consecutive
    /// steps; returns whether that happened within `max_steps`.
    pub fn settle(&mut self, max_steps: usize) -> Result<bool, SimError> {
        let mut quiet = 0;
        for _ in 0..max_steps {
            self.step()?;
            if self.max_speed() < 1e-4 {
                quiet += 1;
                if quiet >= 50 {
                    return Ok(true);
                }
            } else {
                quiet = 0;
            }
        }
        Ok(false)
    }

    fn check_divergence(&self) -> Result<(), SimError> {
        if !self.platform_pos.iter().all(|c| c.is_finite()) {
            return Err(SimError::NumericalDivergence("platform position is NaN".into()));
        }
        let speed = self.max_speed();
        if !speed.is_finite() {
            return Err(SimError::NumericalDivergence("particle velocity is NaN".into()));
        }
        if speed > self.params.max_speed {
            return Err(SimError::NumericalDivergence(format!(
                "speed {speed:.1} m/s exceeds the {:.1} m/s limit (dt too large?)",
                self.params.max_speed
            )));
        }
        Ok(())
    }
}

/// One Gauss-Seidel pass over every constraint; returns the largest
/// absolute violation seen during the pass.
fn project_constraints(
    cables: &mut [Cable],
    platform_pos: &mut Vector3<f64>,
    platform_w: f64,
    rig: &RigGeometry,
    material: &CableMaterial,
    h: f64,
) -> f64 {
    let mut residual_max: f64 = 0.0;
    let h2 = h * h;
    for (ci, cable) in cables.iter_mut().enumerate() {
        let n = cable.positions.len();
        let segs = n - 1;
        let seg_rest = cable.rest_length / segs as f64;
        let alpha_seg = material.compliance * seg_rest / h2;
        let alpha_tether = material.compliance * cable.rest_length / h2;
        let offset = rig.offsets()[ci];

        // Long-range tether: chord may never exceed the paid-out length.
        {
            let anchor = cable.positions[0];
            let d = *platform_pos + offset - anchor;
            let dist = d.norm();
            let c = dist - cable.rest_length;
            if c > 0.0 && dist > 1e-12 {
                let lambda = &mut cable.lambdas[segs];
                let dlambda = (-c - alpha_tether * *lambda) / (platform_w + alpha_tether);
                *lambda += dlambda;
                *platform_pos += d / dist * (platform_w * dlambda);
                residual_max = residual_max.max(c);
            }
        }

        for j in 0..segs {
            let c = if j + 1 < segs {
                let (head, tail) = cable.positions.split_at_mut(j + 1);
                project_pair(
                    &mut head[j],
                    cable.inv_mass[j],
                    &mut tail[0],
                    cable.inv_mass[j + 1],
                    seg_rest,
                    alpha_seg,
                    &mut cable.lambdas[j],
                )
            } else {
                // Last segment couples the chain to the platform.
                let mut attach = *platform_pos + offset;
                let c = project_pair(
                    &mut cable.positions[segs - 1],
                    cable.inv_mass[segs - 1],
                    &mut attach,
                    platform_w,
                    seg_rest,
                    alpha_seg,
                    &mut cable.lambdas[j],
                );
                *platform_pos = attach - offset;
                c
            };
            residual_max = residual_max.max(c);
        }
    }
    residual_max
}

/// XPBD projection of one distance constraint; returns |C|.
fn project_pair(
    xi: &mut Vector3<f64>,
    wi: f64,
    xj: &mut Vector3<f64>,
    wj: f64,
    rest: f64,
    alpha_tilde: f64,
    lambda: &mut f64,
) -> f64 {
    let d = *xj - *xi;
    let dist = d.norm();
    if dist < 1e-12 {
        return rest;
    }
    let c = dist - rest;
    let denom = wi + wj + alpha_tilde;
    if denom <= 0.0 {
        return c.abs();
    }
    let n = d / dist;
    let dlambda = (-c - alpha_tilde * *lambda) / denom;
    *lambda += dlambda;
    *xj += n * (wj * dlambda);
    *xi -= n * (wi * dlambda);
    c.abs()
}

/// A single cable pinned at both ends — the vehicle for checking the
/// solver's settled sag against the analytic catenary.
#[derive(Debug, Clone)]
pub struct PendantCable {
    positions: Vec<Vector3<f64>>,
    velocities: Vec<Vector3<f64>>,
    prev: Vec<Vector3<f64>>,
    inv_mass: Vec<f64>,
    arc_length: f64,
    material: CableMaterial,
    params: SimParams,
}

impl PendantCable {
    /// Pins the ends at (0,0,0) and (span,0,0) with `arc_length` of cable
    /// between them, initially laid out straight.
    pub fn new(
        span: f64,
        arc_length: f64,
        particles: usize,
        material: &CableMaterial,
        params: &SimParams,
    ) -> Result<Self, SimError> {
        if particles < 3 {
            return Err(SimError::InvalidParams("particles must be >= 3".into()));
        }
        if !(arc_length >= span) || !(span > 0.0) {
            return Err(SimError::InvalidParams(
                "need arc_length >= span > 0".into(),
            ));
        }
        material.validate().map_err(SimError::InvalidParams)?;
        let a = Vector3::zeros();
        let b = Vector3::new(span, 0.0, 0.0);
        let positions: Vec<_> = (0..particles)
            .map(|k| a + (b - a) * (k as f64 / (particles - 1) as f64))
            .collect();
        let particle_mass = material.linear_mass * arc_length / (particles - 1) as f64;
        let mut inv_mass = vec![1.0 / particle_mass; particles];
        inv_mass[0] = 0.0;
        inv_mass[particles - 1] = 0.0;
        Ok(PendantCable {
            velocities: vec![Vector3::zeros(); particles],
            prev: positions.clone(),
            positions,
            inv_mass,
            arc_length,
            material: *material,
            params: *params,
        })
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn measured_length(&self) -> f64 {
        self.positions
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .sum()
    }

    /// Sag of the lowest particle below the pin height.
    pub fn midpoint_sag(&self) -> f64 {
        let lowest = self
            .positions
            .iter()
            .map(|p| p.z)
            .fold(f64::INFINITY, f64::min);
        -lowest
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn step(&mut self) -> Result<(), SimError> {
        let n = self.positions.len();
        let segs = n - 1;
        let seg_rest = self.arc_length / segs as f64;
        let h = self.params.dt / self.params.substeps as f64;
        let alpha = self.material.compliance * seg_rest / (h * h);
        let gravity = self.params.gravity;
        let mut lambdas = vec![0.0; segs];

        for _ in 0..self.params.substeps {
            for k in 0..n {
                if self.inv_mass[k] > 0.0 {
                    self.velocities[k] += gravity * h;
                    self.prev[k] = self.positions[k];
                    self.positions[k] += self.velocities[k] * h;
                }
            }
            lambdas.iter_mut().for_each(|l| *l = 0.0);
            for _ in 0..self.params.constraint_iterations {
                for j in 0..segs {
                    let (head, tail) = self.positions.split_at_mut(j + 1);
                    project_pair(
                        &mut head[j],
                        self.inv_mass[j],
                        &mut tail[0],
                        self.inv_mass[j + 1],
                        seg_rest,
                        alpha,
                        &mut lambdas[j],
                    );
                }
            }
            for k in 0..n {
                if self.inv_mass[k] > 0.0 {
                    self.velocities[k] = (self.positions[k] - self.prev[k]) / h;
                }
            }
        }
        for v in self.velocities.iter_mut() {
            *v *= self.material.damping;
        }

        let speed = self.max_speed();
        if !speed.is_finite() || speed > self.params.max_speed {
            return Err(SimError::NumericalDivergence(format!(
                "pendant cable speed {speed:.1} m/s"
            )));
        }
        Ok(())
    }

    pub fn settle(&mut self, max_steps: usize) -> Result<bool, SimError> {
        let mut quiet = 0;
        for _ in 0..max_steps {
            self.step()?;
            if self.max_speed() < 1e-4 {
                quiet += 1;
                if quiet >= 50 {
                    return Ok(true);
                }
            } else {
                quiet = 0;
            }
        }
        Ok(false)
    }
}
