//! Scratch probe: desk-scale no-sag training throughput and learning.
use carosac::envs::{EnvConfig, NoSagEnv};
use carosac::rig::RigGeometry;
use carosac::td3::{train, Td3Config, TrainOptions};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let episodes: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(300);
    let hidden: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(64);
    let rig = RigGeometry::default();
    let cfg = Td3Config {
        n_episodes: episodes,
        n_steps: 100,
        random_episodes: 100,
        hidden: vec![hidden, hidden],
        ..Td3Config::default()
    };
    let env_cfg = EnvConfig { max_steps_per_episode: 100, ..EnvConfig::default() };
    let mut env = NoSagEnv::new(rig, env_cfg);
    let t0 = std::time::Instant::now();
    let (_, log) = train(&mut env, &cfg, 42, TrainOptions::default()).unwrap();
    let elapsed = t0.elapsed();
    let rand_mean = log.mean_reward(0..100);
    let n = log.episodes.len();
    let last100 = log.mean_reward(n - 100..n);
    let success = log.success_rate(n - 100..n);
    println!("episodes {n} hidden {hidden}: {elapsed:?}");
    println!("random-phase mean reward {rand_mean:.2}");
    println!("final-100 mean reward {last100:.2}, success rate {success:.2}");
    // per-chunk means to see the trend
    for c in (100..n).step_by(100) {
        let hi = (c + 100).min(n);
        println!("  eps {c}..{hi}: mean {:.2} success {:.2}", log.mean_reward(c..hi), log.success_rate(c..hi));
    }
}
