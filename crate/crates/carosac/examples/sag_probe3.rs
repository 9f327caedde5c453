use carosac::sim::{CableMaterial, SimParams, SimScene};
use carosac::rig::{fk_residual, Position, RigGeometry};
use carosac::fk::{FkSolver, FkSolverConfig};

fn main() {
    let rig = RigGeometry::default();
    let params = SimParams::default();
    let stiff = CableMaterial { compliance: 1e-9, linear_mass: 1e-4, damping: 0.98 };
    let p = Position::new(1.5389980370994305, -1.9971473551765673, 0.5097492951962166);
    let mut scene = SimScene::build(&rig, &params, &stiff, p).unwrap();
    let mut fk = FkSolver::new(FkSolverConfig::default());
    for total in [2000usize, 8000, 20000, 60000] {
        let mut s = scene.clone();
        let mut steps = 0;
        while steps < total { s.step().unwrap(); steps += 1; }
        let rest = s.rest_lengths();
        let fkp = fk.minimize(&rest, &rig, Some(p)).unwrap();
        let sim_p = s.robot_position();
        println!(
            "steps {total}: err {:.5} simz {:.4} fkz {:.4} E(sim) {:.3e} E(fk) {:.3e} speed {:.2e}",
            sim_p.distance(&fkp.position), sim_p.0.z, fkp.position.0.z,
            fk_residual(sim_p, &rest, &rig), fkp.residual, s.max_speed()
        );
        let chords = s.chord_lengths();
        let viol: Vec<f64> = (0..4).map(|i| chords[i] - rest[i]).collect();
        println!("  chord-rest: {viol:?}");
    }
    let _ = scene.step();
}
