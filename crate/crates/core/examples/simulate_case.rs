//! Simulates one scenario file, writes the trajectory CSV next to it in the
//! temp directory and prints the metrics.
//!
//! cargo run --example simulate_case [scenario.scn]

use std::path::PathBuf;

use swarmlink::{parse_scenario, run, CaseDatabase, SimConfig};

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/case1.scn")
    });
    let scenario = parse_scenario(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let result = run(&scenario, &SimConfig::default(), &CaseDatabase::builtin()).unwrap();

    let out = std::env::temp_dir().join(format!("{}.csv", scenario.name));
    result.log.write_csv(std::fs::File::create(&out).unwrap()).unwrap();

    let m = &result.metrics;
    println!("scenario       {}", m.scenario);
    println!("case           {} {:?}", m.active_case, result.params);
    println!("success        {} {:?}", m.success, m.failure_reason);
    println!("duration       {:.2} s ({} steps)", m.duration_s, m.steps);
    println!("drone path     {:.3} m", m.drone_path_length);
    println!("robot path     {:.3} m (x{:.3})", m.robot_path_length, m.path_ratio());
    println!("max deviation  {:.3} m", m.max_lateral_deviation);

    let switches = result
        .log
        .records
        .windows(2)
        .filter(|w| w[0].topology != w[1].topology)
        .count();
    println!("link switches  {switches}");
    println!("log            {}", out.display());
}
