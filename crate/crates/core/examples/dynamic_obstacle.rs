//! Static and moving variants of the same scene: the leader flies the same
//! path, the robot reacts to the moving short obstacle.
//!
//! cargo run --example dynamic_obstacle

use std::path::Path;

use swarmlink::{parse_scenario, run, CaseDatabase, SimConfig, Vec2};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenarios");
    let load = |f: &str| parse_scenario(&std::fs::read_to_string(dir.join(f)).unwrap()).unwrap();
    let db = CaseDatabase::builtin();
    let cfg = SimConfig::default();

    let fixed = run(&load("case3.scn"), &cfg, &db).unwrap();
    let moving = run(&load("case3_dynamic.scn"), &cfg, &db).unwrap();

    let n = fixed.log.len().min(moving.log.len());
    let drone_gap = fixed.log.records[..n]
        .iter()
        .zip(&moving.log.records[..n])
        .map(|(a, b)| a.drone_position().distance(b.drone_position()))
        .fold(0.0, f64::max);
    let robot_gap = fixed.log.records[..n]
        .iter()
        .zip(&moving.log.records[..n])
        .map(|(a, b)| a.robot_position().distance(b.robot_position()))
        .fold(0.0, f64::max);

    for (name, r) in [("static", &fixed), ("dynamic", &moving)] {
        let m = &r.metrics;
        println!(
            "{name:>8}: success {} in {:.2} s, robot path {:.3} m, deviation {:.3} m",
            m.success, m.duration_s, m.robot_path_length, m.max_lateral_deviation
        );
    }
    println!("largest drone separation between runs: {drone_gap:e} m");
    println!("largest robot separation between runs: {robot_gap:.3} m");

    let first_avoid = |r: &swarmlink::SimResult| -> Option<(f64, Vec2)> {
        r.log
            .records
            .iter()
            .find(|rec| rec.topology.contains("S1"))
            .map(|rec| (rec.t, rec.robot_position()))
    };
    println!("first S1 link  static {:?}", first_avoid(&fixed));
    println!("first S1 link dynamic {:?}", first_avoid(&moving));
}
