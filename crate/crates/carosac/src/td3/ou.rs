//! Ornstein-Uhlenbeck exploration noise with per-episode sigma decay.
//!
//! Per component: `x ← x + θ(μ − x) + σ(episode)·N(0,1)` with `μ = 0`
//! and `σ(episode) = σ0 · decay^episode`, so exploration shrinks as
//! training progresses.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::envs::ACT_DIM;

#[derive(Debug, Clone)]
pub struct OuNoise {
    state: [f64; ACT_DIM],
    theta: f64,
    sigma0: f64,
    decay: f64,
}

impl OuNoise {
    pub fn new(theta: f64, sigma0: f64, decay: f64) -> Self {
        OuNoise {
            state: [0.0; ACT_DIM],
            theta,
            sigma0,
            decay,
        }
    }

    /// Clears the correlated state (call at episode start).
    pub fn reset(&mut self) {
        self.state = [0.0; ACT_DIM];
    }

    /// Sigma in effect at a 0-based training episode index.
    pub fn sigma(&self, episode: usize) -> f64 {
        self.sigma0 * self.decay.powi(episode as i32)
    }

    pub fn sample<R: Rng>(&mut self, rng: &mut R, episode: usize) -> [f64; ACT_DIM] {
        let sigma = self.sigma(episode);
        for x in self.state.iter_mut() {
            let n: f64 = rng.sample(StandardNormal);
            *x += self.theta * (0.0 - *x) + sigma * n;
        }
        self.state
    }
}
