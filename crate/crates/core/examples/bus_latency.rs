//! Runs one scenario over an increasingly poor message bus.
//!
//! cargo run --release --example bus_latency [scenario.scn]

use std::path::PathBuf;

use swarmlink::{parse_scenario, run, CaseDatabase, SimConfig};

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/case2.scn")
    });
    let scenario = parse_scenario(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let db = CaseDatabase::builtin();

    println!("{:>7} {:>5} {:>7} {:>9} {:>6} {:>7}", "latency", "drop", "success", "duration", "ratio", "dev");
    for latency in [0, 2, 5, 10] {
        for drop in [0.0, 0.1, 0.3] {
            let mut cfg = SimConfig::default();
            cfg.bus.latency_steps = latency;
            cfg.bus.drop_probability = drop;
            cfg.bus.rng_seed = 3;
            let m = run(&scenario, &cfg, &db).unwrap().metrics;
            println!(
                "{latency:>7} {drop:>5.1} {:>7} {:>8.2}s {:>6.3} {:>7.3}",
                m.success,
                m.duration_s,
                m.path_ratio(),
                m.max_lateral_deviation
            );
        }
    }
}
