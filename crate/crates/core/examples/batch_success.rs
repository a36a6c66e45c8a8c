//! Jitters the obstacles of the bundled cases and reports the success rate,
//! then writes the batch summary CSV.
//!
//! cargo run --release --example batch_success [perturbations] [jitter]

use std::path::Path;

use swarmlink::engine::{format_rate, perturb_scenario};
use swarmlink::{parse_scenario, run_batch, CaseDatabase, SimConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let per_case: u64 = args.next().map_or(50, |a| a.parse().unwrap());
    let jitter: f64 = args.next().map_or(0.3, |a| a.parse().unwrap());

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenarios");
    let mut scenarios = Vec::new();
    for f in ["case1.scn", "case2.scn", "case3.scn"] {
        let base = parse_scenario(&std::fs::read_to_string(dir.join(f)).unwrap()).unwrap();
        scenarios.extend((0..per_case).map(|seed| perturb_scenario(&base, seed, jitter)));
    }

    let summary = run_batch(&scenarios, &SimConfig::default(), &CaseDatabase::builtin(), &[0]).unwrap();
    for row in summary.rows.iter().filter(|r| !r.metrics.success) {
        println!("failed: {} ({:?})", row.metrics.scenario, row.metrics.failure_reason);
    }
    println!(
        "{} / {} succeeded: {}",
        summary.successes(),
        summary.rows.len(),
        format_rate(summary.success_rate())
    );

    let out = std::env::temp_dir().join("batch_success.csv");
    summary.write_csv(std::fs::File::create(&out).unwrap()).unwrap();
    println!("summary written to {}", out.display());
}
