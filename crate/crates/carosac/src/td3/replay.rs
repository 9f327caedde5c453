//! Uniform replay buffer with FIFO eviction.

use rand::Rng;

use super::Td3Error;
use crate::envs::{ACT_DIM, OBS_DIM};

/// One environment transition; observations and actions are stored in
/// the agent's normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub obs: [f64; OBS_DIM],
    pub action: [f64; ACT_DIM],
    pub reward: f64,
    pub next_obs: [f64; OBS_DIM],
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    data: Vec<Transition>,
    capacity: usize,
    write: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        ReplayBuffer {
            data: Vec::with_capacity(capacity.min(1 << 20)),
            capacity,
            write: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends, evicting the oldest entry once at capacity.
    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.write] = t;
        }
        self.write = (self.write + 1) % self.capacity;
    }

    /// `k` transitions sampled uniformly without replacement.
    pub fn sample<R: Rng>(&self, rng: &mut R, k: usize) -> Result<Vec<Transition>, Td3Error> {
        if self.data.len() < k {
            return Err(Td3Error::InsufficientBuffer {
                have: self.data.len(),
                need: k,
            });
        }
        Ok(rand::seq::index::sample(rng, self.data.len(), k)
            .into_iter()
            .map(|i| self.data[i])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(tag: f64) -> Transition {
        Transition {
            obs: [tag; OBS_DIM],
            action: [tag; ACT_DIM],
            reward: tag,
            next_obs: [tag; OBS_DIM],
            done: false,
        }
    }

    #[test]
    fn fifo_eviction_at_capacity() {
        let mut buf = ReplayBuffer::new(3);
        for i in 0..5 {
            buf.push(transition(i as f64));
        }
        assert_eq!(buf.len(), 3);
        let mut rewards: Vec<f64> = buf.data.iter().map(|t| t.reward).collect();
        rewards.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // 0 and 1 were evicted
        assert_eq!(rewards, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn sample_without_replacement() {
        let mut buf = ReplayBuffer::new(100);
        for i in 0..50 {
            buf.push(transition(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let batch = buf.sample(&mut rng, 50).unwrap();
        let mut tags: Vec<i64> = batch.iter().map(|t| t.reward as i64).collect();
        tags.sort_unstable();
        tags.dedup();
        assert_eq!(tags.len(), 50);
    }

    #[test]
    fn insufficient_buffer_errors() {
        let mut buf = ReplayBuffer::new(10);
        buf.push(transition(1.0));
        assert!(matches!(
            buf.sample(&mut ChaCha8Rng::seed_from_u64(0), 2),
            Err(Td3Error::InsufficientBuffer { have: 1, need: 2 })
        ));
    }

    /// Sampling frequencies from a 1000-item buffer stay within 5 sigma
    /// of uniform over 1e5 draws.
    #[test]
    fn sampling_is_uniform() {
        let mut buf = ReplayBuffer::new(1000);
        for i in 0..1000 {
            buf.push(transition(i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let draws = 10_000;
        let k = 10; // 1e5 sampled items in total
        let mut counts = vec![0u32; 1000];
        for _ in 0..draws {
            for t in buf.sample(&mut rng, k).unwrap() {
                counts[t.reward as usize] += 1;
            }
        }
        // per item: Binomial(draws, k/1000) => mean 100, sigma ≈ 9.95
        let mean = (draws * k) as f64 / 1000.0;
        let sigma = (draws as f64 * (k as f64 / 1000.0) * (1.0 - k as f64 / 1000.0)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            let dev = (c as f64 - mean).abs();
            assert!(
                dev <= 5.0 * sigma,
                "item {i} drawn {c} times, mean {mean:.1}, 5 sigma {:.1}",
                5.0 * sigma
            );
        }
    }
}
