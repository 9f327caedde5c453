//! Scratch probe: settled pendant sag vs analytic catenary, and
//! stiff-light platform pose error vs straight-line FK.
use carosac::sim::{CableMaterial, PendantCable, SimParams, SimScene};
use carosac::rig::{inverse_kinematics, CableLengths, Position, RigGeometry};
use carosac::fk::{FkSolver, FkSolverConfig};
use rand::{Rng, SeedableRng};

fn main() {
    let material = CableMaterial::default();
    let params = SimParams::default();
    for (span, arc, expect) in [
        (2.0, 2.2, 0.4006015814720754),
        (2.0, 2.05, 0.19533548672709297),
        (3.0, 3.9, 1.1063922707162799),
    ] {
        let mut c = PendantCable::new(span, arc, 21, &material, &params).unwrap();
        let settled = c.settle(40000).unwrap();
        let sag = c.midpoint_sag();
        println!(
            "span {span} arc {arc}: sag {sag:.5} expect {expect:.5} rel err {:.3}% settled {settled} len {:.5}",
            (sag - expect).abs() / expect * 100.0, c.measured_length()
        );
    }

    let rig = RigGeometry::default();
    let stiff = CableMaterial { compliance: 1e-9, linear_mass: 1e-4, damping: 0.98 };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut fk = FkSolver::new(FkSolverConfig::default());
    let mut worst = 0.0f64;
    let mut unsettled = 0;
    let t0 = std::time::Instant::now();
    for _ in 0..50 {
        let p = Position::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.0..2.0),
        );
        let mut scene = SimScene::build(&rig, &params, &stiff, p).unwrap();
        if !scene.settle(3000).unwrap() { unsettled += 1; }
        let rest = scene.rest_lengths();
        let fk_pos = fk.minimize(&rest, &rig, Some(p)).unwrap().position;
        let err = scene.robot_position().distance(&fk_pos);
        worst = worst.max(err);
    }
    println!("stiff-light worst pose error {worst:.5} m, unsettled {unsettled}, took {:?}", t0.elapsed());

    let mut scene = SimScene::build(&rig, &params, &material, Position::new(0.0,0.0,1.0)).unwrap();
    scene.settle(3000).unwrap();
    println!("default material settled sag deflections: {:?}", scene.sag_deflection());
    println!("platform sank to {:?}", scene.robot_position().0);
    let rest = scene.rest_lengths();
    let mut t = rest.0; t[0] += 0.2;
    scene.set_commanded_lengths(&CableLengths(t));
    for _ in 0..600 { scene.step().unwrap(); }
    println!("after slacking cable 0 by 0.2m: sag {:?}", scene.sag_deflection());
    println!("position {:?}", scene.robot_position().0);
    let ik = inverse_kinematics(scene.robot_position(), &rig);
    println!("measured {:?} vs ik-chord {:?}", scene.measured_cable_lengths().0, ik.0);
}
