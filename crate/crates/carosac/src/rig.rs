//! Rig geometry and straight-line cable kinematics.
//!
//! Cables are modeled as straight chords between the fixed exit points
//! `a_i` and the platform attachment points `p + o_i`, giving the
//! closed-form inverse kinematics
//!
//! ```text
//! L_i = ‖(p + o_i) − a_i‖,  i = 1..4
//! ```
//!
//! and the forward-kinematics residual
//!
//! ```text
//! E(p) = Σ_i (‖(p + o_i) − a_i‖ − L_i)²
//! ```
//!
//! minimized by the solver in [`crate::fk`]. These straight-line maps are
//! the no-sag physics and the ground-truth oracle for everything else.

use nalgebra::Vector3;
use thiserror::Error;

pub const NUM_CABLES: usize = 4;

/// Platform center position in the world frame [m].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position(pub Vector3<f64>);

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Position(Vector3::new(x, y, z))
    }

    pub fn coords(&self) -> Vector3<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.0 - other.0).norm()
    }
}

impl From<Vector3<f64>> for Position {
    fn from(v: Vector3<f64>) -> Self {
        Position(v)
    }
}

/// Lengths of the four cables [m], indexed like the anchors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableLengths(pub [f64; NUM_CABLES]);

impl CableLengths {
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|l| l.is_finite())
    }

    /// Largest componentwise absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &CableLengths) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for CableLengths {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Violations of the rig invariants, reported by [`RigGeometry::new`] and
/// by config loading.
#[derive(Debug, Error, PartialEq)]
pub enum RigError {
    #[error("exactly 4 anchors (got {0})")]
    AnchorCount(usize),
    #[error("exactly 4 offsets (got {0})")]
    OffsetCount(usize),
    #[error("anchors must be pairwise distinct (anchors {0} and {1} coincide)")]
    DuplicateAnchors(usize, usize),
    #[error("workspace_min must be strictly below workspace_max on every axis")]
    WorkspaceOrder,
    #[error("length_bounds must satisfy 0 <= min < max (got {0}..{1})")]
    BadLengthBounds(f64, f64),
    #[error("cable {cable} length {length:.4} m at workspace corner ({x:.2},{y:.2},{z:.2}) outside length_bounds")]
    CornerOutOfBounds {
        cable: usize,
        length: f64,
        x: f64,
        y: f64,
        z: f64,
    },
    #[error("all anchors must lie above the workspace top (suspended configuration)")]
    AnchorsNotAbove,
    #[error("rig contains a non-finite value")]
    NonFinite,
}

/// Geometry of the 4-cable suspended rig: cable exit points `a_i`,
/// platform attachment offsets `o_i`, the axis-aligned workspace box,
/// and the admissible cable length range. All units meters.
#[derive(Debug, Clone, PartialEq)]
pub struct RigGeometry {
    anchors: [Vector3<f64>; NUM_CABLES],
    offsets: [Vector3<f64>; NUM_CABLES],
    workspace_min: Vector3<f64>,
    workspace_max: Vector3<f64>,
    length_bounds: (f64, f64),
}

impl RigGeometry {
    /// Validates every rig invariant and returns the geometry, or the
    /// first violated invariant.
    pub fn new(
        anchors: [Vector3<f64>; NUM_CABLES],
        offsets: [Vector3<f64>; NUM_CABLES],
        workspace_min: Vector3<f64>,
        workspace_max: Vector3<f64>,
        length_bounds: (f64, f64),
    ) -> Result<Self, RigError> {
        let finite = anchors.iter().chain(offsets.iter()).all(|v| v.iter().all(|c| c.is_finite()))
            && workspace_min.iter().all(|c| c.is_finite())
            && workspace_max.iter().all(|c| c.is_finite())
            && length_bounds.0.is_finite()
            && length_bounds.1.is_finite();
        if !finite {
            return Err(RigError::NonFinite);
        }
        for i in 0..NUM_CABLES {
            for j in (i + 1)..NUM_CABLES {
                if (anchors[i] - anchors[j]).norm() < 1e-9 {
                    return Err(RigError::DuplicateAnchors(i, j));
                }
            }
        }
        if !(workspace_min.x < workspace_max.x
            && workspace_min.y < workspace_max.y
            && workspace_min.z < workspace_max.z)
        {
            return Err(RigError::WorkspaceOrder);
        }
        if !(0.0 <= length_bounds.0 && length_bounds.0 < length_bounds.1) {
            return Err(RigError::BadLengthBounds(length_bounds.0, length_bounds.1));
        }
        if anchors.iter().any(|a| a.z <= workspace_max.z) {
            return Err(RigError::AnchorsNotAbove);
        }
        let rig = RigGeometry {
            anchors,
            offsets,
            workspace_min,
            workspace_max,
            length_bounds,
        };
        for corner in rig.workspace_corners() {
            let lengths = inverse_kinematics(Position(corner), &rig);
            for (i, l) in lengths.iter().enumerate() {
                if l < length_bounds.0 || l > length_bounds.1 {
                    return Err(RigError::CornerOutOfBounds {
                        cable: i,
                        length: l,
                        x: corner.x,
                        y: corner.y,
                        z: corner.z,
                    });
                }
            }
        }
        Ok(rig)
    }

    pub fn anchors(&self) -> &[Vector3<f64>; NUM_CABLES] {
        &self.anchors
    }

    pub fn offsets(&self) -> &[Vector3<f64>; NUM_CABLES] {
        &self.offsets
    }

    pub fn workspace_min(&self) -> Vector3<f64> {
        self.workspace_min
    }

    pub fn workspace_max(&self) -> Vector3<f64> {
        self.workspace_max
    }

    pub fn length_bounds(&self) -> (f64, f64) {
        self.length_bounds
    }

    pub fn workspace_center(&self) -> Position {
        Position((self.workspace_min + self.workspace_max) * 0.5)
    }

    /// Length of the workspace box diagonal — the largest possible
    /// distance between two workspace points, used to normalize the
    /// distance-to-goal.
    pub fn workspace_diagonal(&self) -> f64 {
        (self.workspace_max - self.workspace_min).norm()
    }

    pub fn contains(&self, p: &Position) -> bool {
        let v = p.0;
        v.x >= self.workspace_min.x
            && v.x <= self.workspace_max.x
            && v.y >= self.workspace_min.y
            && v.y <= self.workspace_max.y
            && v.z >= self.workspace_min.z
            && v.z <= self.workspace_max.z
    }

    pub fn workspace_corners(&self) -> [Vector3<f64>; 8] {
        let lo = self.workspace_min;
        let hi = self.workspace_max;
        [
            Vector3::new(lo.x, lo.y, lo.z),
            Vector3::new(hi.x, lo.y, lo.z),
            Vector3::new(lo.x, hi.y, lo.z),
            Vector3::new(hi.x, hi.y, lo.z),
            Vector3::new(lo.x, lo.y, hi.z),
            Vector3::new(hi.x, lo.y, hi.z),
            Vector3::new(lo.x, hi.y, hi.z),
            Vector3::new(hi.x, hi.y, hi.z),
        ]
    }

    /// Componentwise clamp of a point into the workspace box.
    pub fn clamp_to_workspace(&self, p: &Position) -> Position {
        Position(Vector3::new(
            p.0.x.clamp(self.workspace_min.x, self.workspace_max.x),
            p.0.y.clamp(self.workspace_min.y, self.workspace_max.y),
            p.0.z.clamp(self.workspace_min.z, self.workspace_max.z),
        ))
    }

    /// Clamps each length into `length_bounds`; the flag reports whether
    /// any component actually changed.
    pub fn clamp_lengths(&self, lengths: &CableLengths) -> (CableLengths, bool) {
        let (lo, hi) = self.length_bounds;
        let mut out = [0.0; NUM_CABLES];
        let mut clamped = false;
        for (i, l) in lengths.iter().enumerate() {
            let c = l.clamp(lo, hi);
            if c != l {
                clamped = true;
            }
            out[i] = c;
        }
        (CableLengths(out), clamped)
    }
}

/// Default rig: anchors at the top corners of a 4 m square at height 4 m,
/// a 0.1 m square platform, workspace x,y ∈ [−2,2], z ∈ [0,2], cable
/// lengths admissible in [0.5, 8] m.
impl Default for RigGeometry {
    fn default() -> Self {
        RigGeometry::new(
            [
                Vector3::new(-2.0, -2.0, 4.0),
                Vector3::new(2.0, -2.0, 4.0),
                Vector3::new(2.0, 2.0, 4.0),
                Vector3::new(-2.0, 2.0, 4.0),
            ],
            [
                Vector3::new(-0.05, -0.05, 0.0),
                Vector3::new(0.05, -0.05, 0.0),
                Vector3::new(0.05, 0.05, 0.0),
                Vector3::new(-0.05, 0.05, 0.0),
            ],
            Vector3::new(-2.0, -2.0, 0.0),
            Vector3::new(2.0, 2.0, 2.0),
            (0.5, 8.0),
        )
        .expect("default rig satisfies its own invariants")
    }
}

/// Closed-form inverse kinematics: `L_i = ‖(p + o_i) − a_i‖`.
///
/// Total on finite positions; the result is only guaranteed to lie in
/// `length_bounds` for positions inside the workspace.
pub fn inverse_kinematics(p: Position, rig: &RigGeometry) -> CableLengths {
    let mut lengths = [0.0; NUM_CABLES];
    for i in 0..NUM_CABLES {
        lengths[i] = (p.0 + rig.offsets[i] - rig.anchors[i]).norm();
    }
    CableLengths(lengths)
}

/// Forward-kinematics residual `E(p) = Σ_i (‖(p + o_i) − a_i‖ − L_i)²` [m²].
pub fn fk_residual(p: Position, lengths: &CableLengths, rig: &RigGeometry) -> f64 {
    let mut e = 0.0;
    for i in 0..NUM_CABLES {
        let d = (p.0 + rig.offsets[i] - rig.anchors[i]).norm() - lengths[i];
        e += d * d;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    /// Symmetric test rig: anchors (±2,±2,4), zero offsets.
    fn symmetric_rig() -> RigGeometry {
        RigGeometry::new(
            [
                Vector3::new(-2.0, -2.0, 4.0),
                Vector3::new(2.0, -2.0, 4.0),
                Vector3::new(2.0, 2.0, 4.0),
                Vector3::new(-2.0, 2.0, 4.0),
            ],
            [Vector3::zeros(); 4],
            Vector3::new(-2.0, -2.0, 0.0),
            Vector3::new(2.0, 2.0, 2.0),
            (0.5, 8.0),
        )
        .unwrap()
    }

    #[test]
    fn ik_symmetric_center() {
        let rig = symmetric_rig();
        let lengths = inverse_kinematics(Position::new(0.0, 0.0, 0.0), &rig);
        // hand Euclidean distance: sqrt(2^2 + 2^2 + 4^2) = sqrt(24)
        for l in lengths.iter() {
            assert_relative_eq!(l, 4.898979485566356, epsilon = 1e-12);
        }
    }

    #[test]
    fn ik_zero_length_at_anchor() {
        let rig = RigGeometry::default();
        // p + o_0 = a_0  =>  L_0 = 0
        let p = Position(rig.anchors()[0] - rig.offsets()[0]);
        let lengths = inverse_kinematics(p, &rig);
        assert_eq!(lengths[0], 0.0);
    }

    #[test]
    fn ik_translation_invariance() {
        let rig = symmetric_rig();
        let shift = Vector3::new(0.3, -1.2, 0.7);
        let shifted = RigGeometry::new(
            rig.anchors().map(|a| a + shift),
            *rig.offsets(),
            rig.workspace_min() + shift,
            rig.workspace_max() + shift,
            rig.length_bounds(),
        )
        .unwrap();
        let p = Position::new(0.4, -0.8, 1.1);
        let a = inverse_kinematics(p, &rig);
        let b = inverse_kinematics(Position(p.0 + shift), &shifted);
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn residual_zero_at_exact_solution() {
        let rig = RigGeometry::default();
        let p = Position::new(0.7, -1.1, 1.4);
        let lengths = inverse_kinematics(p, &rig);
        assert_relative_eq!(fk_residual(p, &lengths, &rig), 0.0, epsilon = 1e-24);
    }

    #[test]
    fn residual_hand_value() {
        let rig = symmetric_rig();
        let p = Position::new(0.0, 0.0, 0.0);
        let base = 24.0f64.sqrt();
        let lengths = CableLengths([base + 0.1; 4]);
        // E = 4 * 0.1^2 = 0.04
        assert_relative_eq!(fk_residual(p, &lengths, &rig), 0.04, epsilon = 1e-12);
    }

    #[test]
    fn residual_nonnegative_random() {
        let rig = RigGeometry::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let p = Position::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-1.0..5.0),
            );
            let lengths = CableLengths(std::array::from_fn(|_| rng.gen_range(0.0..10.0)));
            assert!(fk_residual(p, &lengths, &rig) >= 0.0);
        }
    }

    #[test]
    fn determinism_bit_identical() {
        let rig = RigGeometry::default();
        let p = Position::new(0.123456789, -1.987654321, 1.5);
        let a = inverse_kinematics(p, &rig);
        let b = inverse_kinematics(p, &rig);
        for i in 0..4 {
            assert_eq!(a[i].to_bits(), b[i].to_bits());
        }
    }

    #[test]
    fn rejects_duplicate_anchors() {
        let err = RigGeometry::new(
            [
                Vector3::new(-2.0, -2.0, 4.0),
                Vector3::new(-2.0, -2.0, 4.0),
                Vector3::new(2.0, 2.0, 4.0),
                Vector3::new(-2.0, 2.0, 4.0),
            ],
            [Vector3::zeros(); 4],
            Vector3::new(-2.0, -2.0, 0.0),
            Vector3::new(2.0, 2.0, 2.0),
            (0.5, 8.0),
        )
        .unwrap_err();
        assert_eq!(err, RigError::DuplicateAnchors(0, 1));
    }

    #[test]
    fn rejects_anchors_below_workspace_top() {
        let err = RigGeometry::new(
            [
                Vector3::new(-2.0, -2.0, 1.5),
                Vector3::new(2.0, -2.0, 4.0),
                Vector3::new(2.0, 2.0, 4.0),
                Vector3::new(-2.0, 2.0, 4.0),
            ],
            [Vector3::zeros(); 4],
            Vector3::new(-2.0, -2.0, 0.0),
            Vector3::new(2.0, 2.0, 2.0),
            (0.5, 8.0),
        )
        .unwrap_err();
        assert_eq!(err, RigError::AnchorsNotAbove);
    }

    #[test]
    fn rejects_inverted_workspace() {
        let err = RigGeometry::new(
            *RigGeometry::default().anchors(),
            *RigGeometry::default().offsets(),
            Vector3::new(2.0, -2.0, 0.0),
            Vector3::new(-2.0, 2.0, 2.0),
            (0.5, 8.0),
        )
        .unwrap_err();
        assert_eq!(err, RigError::WorkspaceOrder);
    }

    #[test]
    fn rejects_corner_outside_length_bounds() {
        let err = RigGeometry::new(
            *RigGeometry::default().anchors(),
            *RigGeometry::default().offsets(),
            Vector3::new(-2.0, -2.0, 0.0),
            Vector3::new(2.0, 2.0, 2.0),
            (0.5, 5.0), // far corner needs ~6.87 m
        )
        .unwrap_err();
        assert!(matches!(err, RigError::CornerOutOfBounds { .. }));
    }

    proptest! {
        /// Each L_i is 1-Lipschitz in p: ‖IK(p) − IK(q)‖_∞ ≤ ‖p − q‖.
        #[test]
        fn ik_is_lipschitz(
            px in -2.0..2.0, py in -2.0..2.0, pz in 0.0..2.0,
            qx in -2.0..2.0, qy in -2.0..2.0, qz in 0.0..2.0,
        ) {
            let rig = RigGeometry::default();
            let p = Position::new(px, py, pz);
            let q = Position::new(qx, qy, qz);
            let lp = inverse_kinematics(p, &rig);
            let lq = inverse_kinematics(q, &rig);
            prop_assert!(lp.max_abs_diff(&lq) <= p.distance(&q) + 1e-12);
        }

        /// IK of any workspace point stays within the length bounds.
        #[test]
        fn ik_workspace_within_bounds(
            px in -2.0..2.0, py in -2.0..2.0, pz in 0.0..2.0,
        ) {
            let rig = RigGeometry::default();
            let lengths = inverse_kinematics(Position::new(px, py, pz), &rig);
            let (lo, hi) = rig.length_bounds();
            for l in lengths.iter() {
                prop_assert!(l >= lo && l <= hi);
            }
        }
    }
}
