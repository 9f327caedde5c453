//! Natural cubic spline paths with smooth time parameterization.
//!
//! Waypoints are interpolated per axis by a natural cubic spline over a
//! chord-length parameter. Time allocation uses a cosine speed profile
//! `ṡ(t) = v_pk/2 · (1 − cos(2πt/T))`: speed starts and ends at zero and
//! peaks at `v_pk`, which is drawn per trajectory from the upper half of
//! `(0, speed_max]` so a batch of random trajectories covers a range of
//! speeds. Samples are clamped into the workspace box; the clamp is a
//! projection onto a convex set, so it can only shrink inter-sample
//! distances and the speed bound survives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TrajError;
use crate::rig::{Position, RigGeometry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajSample {
    pub t: f64,
    pub p: Position,
}

/// A time-parameterized reference path with uniform sample spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajSample>,
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Largest finite-difference speed between consecutive samples.
    pub fn max_speed(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].p.distance(&w[1].p) / (w[1].t - w[0].t))
            .fold(0.0, f64::max)
    }
}

/// Natural cubic spline through (x_k, y_k) with zero second derivative
/// at the ends; two knots degenerate to a straight line.
struct CubicSpline1D {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline1D {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        debug_assert!(n >= 2);
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for interior second derivatives
            // (Thomas algorithm); natural ends stay zero.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut sub = vec![0.0; k];
            let mut sup = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                sub[i] = h0;
                diag[i] = 2.0 * (h0 + h1);
                sup[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            for i in 1..k {
                let w = sub[i] / diag[i - 1];
                diag[i] -= w * sup[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - sup[i] * m[i + 2]) / diag[i];
            }
        }
        CubicSpline1D { xs, ys, m }
    }

    fn segment(&self, x: f64) -> usize {
        match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).expect("finite knots"))
        {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }
}

struct SplinePath {
    x: CubicSpline1D,
    y: CubicSpline1D,
    z: CubicSpline1D,
    /// Dense arc-length table: (u, cumulative length).
    table_u: Vec<f64>,
    table_s: Vec<f64>,
}

impl SplinePath {
    fn new(waypoints: &[Position]) -> Self {
        // Chord-length parameter; coincident waypoints collapse.
        let mut us = vec![0.0];
        for w in waypoints.windows(2) {
            let d = w[0].distance(&w[1]).max(1e-12);
            us.push(us.last().expect("nonempty") + d);
        }
        let x = CubicSpline1D::new(us.clone(), waypoints.iter().map(|p| p.0.x).collect());
        let y = CubicSpline1D::new(us.clone(), waypoints.iter().map(|p| p.0.y).collect());
        let z = CubicSpline1D::new(us.clone(), waypoints.iter().map(|p| p.0.z).collect());

        // Trapezoid integration of |p'(u)| on a dense grid.
        let per_segment = 512;
        let n_dense = per_segment * (waypoints.len() - 1) + 1;
        let u_max = *us.last().expect("nonempty");
        let mut table_u = Vec::with_capacity(n_dense);
        let mut table_s = Vec::with_capacity(n_dense);
        let mut s = 0.0;
        let mut prev_speed = 0.0;
        for k in 0..n_dense {
            let u = u_max * k as f64 / (n_dense - 1) as f64;
            let speed =
                (x.deriv(u).powi(2) + y.deriv(u).powi(2) + z.deriv(u).powi(2)).sqrt();
            if k > 0 {
                let du = u - table_u[k - 1];
                s += 0.5 * (speed + prev_speed) * du;
            }
            table_u.push(u);
            table_s.push(s);
            prev_speed = speed;
        }
        SplinePath {
            x,
            y,
            z,
            table_u,
            table_s,
        }
    }

    fn total_length(&self) -> f64 {
        *self.table_s.last().expect("nonempty")
    }

    fn position(&self, u: f64) -> Position {
        Position::new(self.x.eval(u), self.y.eval(u), self.z.eval(u))
    }

    /// Parameter at arc length `s` (table lookup plus linear interp).
    fn u_at_arc_length(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total_length());
        let i = match self
            .table_s
            .binary_search_by(|v| v.partial_cmp(&s).expect("finite"))
        {
            Ok(i) => return self.table_u[i],
            Err(i) => i,
        };
        if i == 0 {
            return self.table_u[0];
        }
        if i >= self.table_s.len() {
            return *self.table_u.last().expect("nonempty");
        }
        let (s0, s1) = (self.table_s[i - 1], self.table_s[i]);
        let (u0, u1) = (self.table_u[i - 1], self.table_u[i]);
        if s1 - s0 < 1e-15 {
            u0
        } else {
            u0 + (u1 - u0) * (s - s0) / (s1 - s0)
        }
    }
}

/// Natural cubic spline through the waypoints, time-parameterized so the
/// instantaneous speed never exceeds `speed_max`, sampled at `dt`,
/// starting and ending at rest. The seed picks this trajectory's peak
/// speed from the upper half of the admissible range.
pub fn cubic_spline_trajectory(
    waypoints: &[Position],
    speed_max: f64,
    dt: f64,
    seed: u64,
    rig: &RigGeometry,
) -> Result<Trajectory, TrajError> {
    if !(speed_max > 0.0) {
        return Err(TrajError::InfeasibleSpeed(speed_max));
    }
    if !(dt > 0.0) {
        return Err(TrajError::BadDt(dt));
    }
    if waypoints.len() < 2 {
        return Err(TrajError::InvalidCount {
            min: 2,
            got: waypoints.len(),
        });
    }
    for (index, w) in waypoints.iter().enumerate() {
        if !rig.contains(w) {
            return Err(TrajError::WaypointOutsideWorkspace { index });
        }
    }

    let path = SplinePath::new(waypoints);
    let total = path.total_length();
    if total < 1e-9 {
        // All waypoints coincide: hold position.
        let p = rig.clamp_to_workspace(&waypoints[0]);
        return Ok(Trajectory {
            samples: vec![TrajSample { t: 0.0, p }, TrajSample { t: dt, p }],
            dt,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v_peak = speed_max * (0.5 + 0.5 * rng.gen::<f64>());
    let duration = 2.0 * total / v_peak;
    let n_samples = (duration / dt).ceil() as usize + 1;

    let samples = (0..n_samples)
        .map(|k| {
            let t = k as f64 * dt;
            // cosine profile: s(t) = S (t/T − sin(2πt/T)/(2π))
            let tau = (t / duration).min(1.0);
            let s = total * (tau - (2.0 * std::f64::consts::PI * tau).sin()
                / (2.0 * std::f64::consts::PI));
            let p = path.position(path.u_at_arc_length(s));
            TrajSample {
                t,
                p: rig.clamp_to_workspace(&p),
            }
        })
        .collect();
    Ok(Trajectory { samples, dt })
}

/// `n` uniform waypoints in the workspace box.
pub fn random_waypoints(
    n: usize,
    rig: &RigGeometry,
    seed: u64,
) -> Result<Vec<Position>, TrajError> {
    if n == 0 {
        return Err(TrajError::InvalidCount { min: 1, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = rig.workspace_min();
    let hi = rig.workspace_max();
    Ok((0..n)
        .map(|_| {
            Position::new(
                rng.gen_range(lo.x..=hi.x),
                rng.gen_range(lo.y..=hi.y),
                rng.gen_range(lo.z..=hi.z),
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn passes_through_waypoints() {
        let rig = RigGeometry::default();
        let waypoints = random_waypoints(6, &rig, 5).unwrap();
        let traj = cubic_spline_trajectory(&waypoints, 2.0, 0.02, 0, &rig).unwrap();
        // every waypoint appears along the sampled path within 1e-9 of
        // the exact spline evaluation at its own parameter; check by
        // evaluating the path at the waypoint parameters directly
        let path = SplinePath::new(&waypoints);
        let mut u = 0.0;
        for (k, w) in waypoints.iter().enumerate() {
            if k > 0 {
                u += waypoints[k - 1].distance(w).max(1e-12);
            }
            assert!(
                path.position(u).distance(w) < 1e-9,
                "waypoint {k} missed by {}",
                path.position(u).distance(w)
            );
        }
        assert!(!traj.is_empty());
    }

    #[test]
    fn two_waypoints_give_a_straight_segment() {
        let rig = RigGeometry::default();
        let a = Position::new(-1.0, -1.0, 0.5);
        let b = Position::new(1.0, 1.0, 1.5);
        let traj = cubic_spline_trajectory(&[a, b], 1.0, 0.05, 3, &rig).unwrap();
        // all samples are on segment ab: distance to the line is ~0
        let dir = (b.0 - a.0).normalize();
        for s in &traj.samples {
            let rel = s.p.0 - a.0;
            let off = (rel - dir * rel.dot(&dir)).norm();
            assert!(off < 1e-9, "off-line by {off}");
        }
        // endpoints match
        assert!(traj.samples.first().unwrap().p.distance(&a) < 1e-9);
        assert!(traj.samples.last().unwrap().p.distance(&b) < 1e-9);
    }

    #[test]
    fn speed_bound_holds() {
        let rig = RigGeometry::default();
        for seed in 0..20u64 {
            let waypoints = random_waypoints(5, &rig, seed).unwrap();
            let speed_max = 0.5 + (seed as f64) * 0.2;
            let traj =
                cubic_spline_trajectory(&waypoints, speed_max.min(5.0), 0.05, seed, &rig).unwrap();
            assert!(
                traj.max_speed() <= speed_max.min(5.0) + 1e-6,
                "seed {seed}: max fd speed {} > {}",
                traj.max_speed(),
                speed_max.min(5.0)
            );
        }
    }

    #[test]
    fn starts_and_ends_at_rest() {
        let rig = RigGeometry::default();
        let waypoints = random_waypoints(4, &rig, 9).unwrap();
        let traj = cubic_spline_trajectory(&waypoints, 3.0, 0.01, 9, &rig).unwrap();
        let s = &traj.samples;
        let v_start = s[0].p.distance(&s[1].p) / traj.dt;
        let v_end = s[s.len() - 2].p.distance(&s[s.len() - 1].p) / traj.dt;
        // cosine profile: boundary speeds are O(dt) of the peak
        assert!(v_start < 0.1, "start speed {v_start}");
        assert!(v_end < 0.1, "end speed {v_end}");
    }

    #[test]
    fn samples_stay_in_workspace() {
        let rig = RigGeometry::default();
        for seed in 0..10u64 {
            let waypoints = random_waypoints(7, &rig, seed + 100).unwrap();
            let traj = cubic_spline_trajectory(&waypoints, 5.0, 0.05, seed, &rig).unwrap();
            for s in &traj.samples {
                assert!(rig.contains(&s.p));
            }
        }
    }

    #[test]
    fn strictly_increasing_uniform_time() {
        let rig = RigGeometry::default();
        let waypoints = random_waypoints(3, &rig, 2).unwrap();
        let traj = cubic_spline_trajectory(&waypoints, 2.5, 0.125, 4, &rig).unwrap();
        for w in traj.samples.windows(2) {
            assert_relative_eq!(w[1].t - w[0].t, 0.125, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let rig = RigGeometry::default();
        let wp = random_waypoints(3, &rig, 0).unwrap();
        assert!(matches!(
            cubic_spline_trajectory(&wp, 0.0, 0.1, 0, &rig),
            Err(TrajError::InfeasibleSpeed(_))
        ));
        assert!(matches!(
            cubic_spline_trajectory(&wp[..1], 1.0, 0.1, 0, &rig),
            Err(TrajError::InvalidCount { .. })
        ));
        assert!(matches!(
            random_waypoints(0, &rig, 0),
            Err(TrajError::InvalidCount { .. })
        ));
        let outside = vec![Position::new(0.0, 0.0, 1.0), Position::new(9.0, 0.0, 1.0)];
        assert!(matches!(
            cubic_spline_trajectory(&outside, 1.0, 0.1, 0, &rig),
            Err(TrajError::WaypointOutsideWorkspace { index: 1 })
        ));
    }

    #[test]
    fn random_waypoints_deterministic_and_in_box() {
        let rig = RigGeometry::default();
        let a = random_waypoints(50, &rig, 77).unwrap();
        let b = random_waypoints(50, &rig, 77).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!(rig.contains(p));
        }
    }
}
