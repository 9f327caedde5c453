//! Diagnosis: (1) where do random actions place the platform, (2) does the
//! trained critic rank the IK action above the policy action, (3) how far
//! is the actor from the IK mapping.
use carosac::envs::{Action, EnvConfig, Environment, NoSagEnv, Observation};
use carosac::fk::{FkSolver, FkSolverConfig};
use carosac::rig::{inverse_kinematics, RigGeometry, Position};
use carosac::td3::{train, Td3Config, TrainOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let rig = RigGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut fk = FkSolver::new(FkSolverConfig::default());

    // 1. Position distribution of uniform random actions
    let mut zs = Vec::new();
    let mut dists = Vec::new();
    for _ in 0..5000 {
        let a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
        let act = Action::from_normalized(&a, &rig);
        let sol = fk.minimize(&act.lengths, &rig, None).unwrap();
        let p = sol.position;
        zs.push(p.0.z);
        let target = Position::new(
            rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..2.0));
        dists.push(p.distance(&target));
    }
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("random-action position z: p5 {:.2} p50 {:.2} p95 {:.2}", zs[250], zs[2500], zs[4750]);
    println!("random-action dist-to-random-target: p5 {:.2} p50 {:.2} p95 {:.2}  frac<=0.05: {:.4}",
        dists[250], dists[2500], dists[4750],
        dists.iter().filter(|d| **d <= 0.05).count() as f64 / 5000.0);

    // 2+3. Short training run, then inspect actor vs IK and critic ranking
    let cfg = Td3Config {
        n_episodes: 300, n_steps: 100, random_episodes: 100,
        hidden: vec![64, 64], ..Td3Config::default()
    };
    let env_cfg = EnvConfig { max_steps_per_episode: 100, ..EnvConfig::default() };
    let mut env = NoSagEnv::new(rig.clone(), env_cfg);
    let (agent, log) = train(&mut env, &cfg, 42, TrainOptions::default()).unwrap();
    let n = log.episodes.len();
    println!("300ep run: random mean {:.1}, last-50 mean {:.1}",
        log.mean_reward(0..100), log.mean_reward(n-50..n));

    let mut gap = 0.0;
    let mut act_norm = 0.0;
    for k in 0..200 {
        let start = Position::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..2.0));
        let target = Position::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..2.0));
        let obs = Observation {
            current_lengths: inverse_kinematics(start, &rig),
            current_position: start,
            target_position: target,
        };
        let pi = agent.select_action(&obs.normalized(&rig), None);
        let ik = Action::new(inverse_kinematics(target, &rig)).to_normalized(&rig);
        gap += pi.iter().zip(ik.iter()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 4.0;
        act_norm += pi.iter().map(|v| v.abs()).sum::<f64>() / 4.0;
        if k < 3 {
            println!("  pi {:?}", pi);
            println!("  ik {:?}", ik);
        }
        // where does the policy action lead?
        let act = Action::from_normalized(&pi, &rig);
        let p = fk.minimize(&act.lengths, &rig, Some(start)).unwrap().position;
        if k < 3 { println!("  -> position {:?} target {:?} dist {:.2}", p.0, target.0, p.distance(&target)); }
    }
    println!("mean |pi - ik| per component: {:.3}, mean |pi|: {:.3}", gap / 200.0, act_norm / 200.0);
}
