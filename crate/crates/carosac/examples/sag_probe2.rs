use carosac::sim::{CableMaterial, SimParams, SimScene};
use carosac::rig::{Position, RigGeometry};
use carosac::fk::{FkSolver, FkSolverConfig};
use rand::{Rng, SeedableRng};

fn main() {
    let rig = RigGeometry::default();
    let params = SimParams::default();
    let stiff = CableMaterial { compliance: 1e-9, linear_mass: 1e-4, damping: 0.98 };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut fk = FkSolver::new(FkSolverConfig::default());
    let t0 = std::time::Instant::now();
    let mut errs: Vec<(f64, bool, Position)> = Vec::new();
    for _ in 0..50 {
        let p = Position::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.0..2.0),
        );
        let mut scene = SimScene::build(&rig, &params, &stiff, p).unwrap();
        let settled = scene.settle(8000).unwrap();
        let rest = scene.rest_lengths();
        let fk_pos = fk.minimize(&rest, &rig, Some(p)).unwrap().position;
        let err = scene.robot_position().distance(&fk_pos);
        errs.push((err, settled, p));
    }
    errs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for (e, s, p) in errs.iter().take(5) {
        println!("err {e:.5} settled {s} at {:?}", p.0);
    }
    println!("took {:?}", t0.elapsed());
}
