//! Describes each bundled scenario, embeds the description and shows the
//! distance to every case in the database.
//!
//! cargo run --example case_retrieval [scenario.scn ...]

use std::path::PathBuf;

use swarmlink::retrieval::{describe_scene, euclidean_distance, nearest_case, Embedder};
use swarmlink::{parse_scenario, CaseDatabase};

fn main() {
    let mut paths: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    if paths.is_empty() {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenarios");
        paths = ["case1.scn", "case2.scn", "case3.scn", "empty.scn"].iter().map(|f| dir.join(f)).collect();
    }
    let db = CaseDatabase::builtin();
    let embedder = db.embedder();

    for path in paths {
        let scenario = parse_scenario(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let descriptor = describe_scene(&scenario);
        let query = embedder.embed(&descriptor.text).unwrap();
        let hit = nearest_case(&db, &query).unwrap();
        println!("{}: \"{}\"", scenario.name, descriptor.text);
        for rec in &db.records {
            let d = euclidean_distance(&rec.embedding, &query).unwrap();
            let mark = if rec.case_id == hit.case_id { "<-" } else { "" };
            println!("  {:>4} {d:.4} {mark}", rec.case_id.to_string());
        }
        let p = hit.params;
        println!("  using case {}: m={} k={} d={} f_coeff={}\n", hit.case_id, p.m, p.k, p.d, p.f_coeff);
    }
}
