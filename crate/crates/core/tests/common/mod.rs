#![allow(dead_code)]

use std::path::PathBuf;

use swarmlink::{parse_scenario, Scenario};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/scenarios").join(name)
}

pub fn load(name: &str) -> Scenario {
    let text = std::fs::read_to_string(scenario_path(name)).unwrap();
    parse_scenario(&text).unwrap()
}

pub fn bundled_cases() -> Vec<Scenario> {
    ["case1.scn", "case2.scn", "case3.scn"].into_iter().map(load).collect()
}
