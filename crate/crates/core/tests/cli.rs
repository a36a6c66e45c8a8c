mod common;

use std::process::{Command, Output};

use common::scenario_path;

fn swarmlink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmlink")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(name: &str) -> String {
    scenario_path(name).to_str().unwrap().to_owned()
}

#[test]
fn retrieve_prints_case_row() {
    let db = concat!(env!("CARGO_MANIFEST_DIR"), "/data/default.db");
    let o = swarmlink(&["retrieve", &path("case1.scn"), "--db", db]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains(r#""case_id":"I","m":1.0,"k":5.0,"d":2.5,"f_coeff":0.68"#), "{out}");
    assert!(out.contains(r#""schema_version":1"#));
}

#[test]
fn validate_reports_missing_goal() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.scn");
    std::fs::write(
        &broken,
        "name = \"broken\"\ndrone_start = [0.0, 0.0]\nrobot_start = [0.0, 0.0]\n\n[bounds]\nmin_x = -1.0\nmin_y = -1.0\nmax_x = 1.0\nmax_y = 1.0\n",
    )
    .unwrap();
    let o = swarmlink(&["validate", broken.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("goal"));

    let ok = swarmlink(&["validate", &path("case2.scn")]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn validate_lists_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    std::fs::write(
        &bad,
        "name = \"bad\"\ndrone_start = [0.0, 0.0]\nrobot_start = [0.0, 0.0]\ngoal = [9.0, 0.0]\n\n[bounds]\nmin_x = -1.0\nmin_y = -1.0\nmax_x = 1.0\nmax_y = 1.0\n\n[[obstacle]]\nid = \"A\"\nkind = \"short\"\nposition = [0.5, 0.5]\nradius = -0.1\n",
    )
    .unwrap();
    let o = swarmlink(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.lines().count() >= 2, "{out}");
    assert!(out.contains("goal"));
    assert!(out.contains("radius"));
}

#[test]
fn run_then_replay_gives_identical_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.csv");
    let metrics = dir.path().join("run.json");
    let scn = path("empty.scn");
    let o = swarmlink(&["run", &scn, "--log", log.to_str().unwrap(), "--metrics", metrics.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let run_json = stdout(&o);
    assert_eq!(run_json.trim_end(), std::fs::read_to_string(&metrics).unwrap());

    let r = swarmlink(&["replay", log.to_str().unwrap(), "--scenario", &scn]);
    assert_eq!(r.status.code(), Some(0));
    assert_eq!(stdout(&r), run_json);
}

#[test]
fn strict_mode_reports_failed_runs() {
    let scn = path("case1.scn");
    let lax = swarmlink(&["run", &scn, "--max-steps", "20"]);
    assert_eq!(lax.status.code(), Some(0));
    let strict = swarmlink(&["run", &scn, "--max-steps", "20", "--strict"]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(stdout(&strict).contains("Timeout"));
}

#[test]
fn batch_writes_summary_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("batch.csv");
    let scenarios = scenario_path("");
    let o = swarmlink(&["batch", scenarios.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seeds", "1,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("schema_version,index,scenario,seed"));
    let n_scenarios = std::fs::read_dir(&scenarios).unwrap().count();
    assert_eq!(lines.count(), 2 * n_scenarios);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(swarmlink(&[]).status.code(), Some(1));
    assert_eq!(swarmlink(&["run"]).status.code(), Some(1));
    assert_eq!(swarmlink(&["run", "/nonexistent.scn"]).status.code(), Some(1));
    assert_eq!(swarmlink(&["run", &path("empty.scn"), "--m", "1.0"]).status.code(), Some(1));
    assert_eq!(swarmlink(&["run", &path("empty.scn"), "--dt=-0.1"]).status.code(), Some(1));
    let help = swarmlink(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("retrieve"));
}

#[test]
fn override_flags_bypass_retrieval() {
    let o = swarmlink(&["run", &path("case1.scn"), "--m", "1.0", "--k", "5.0", "--d", "2.5", "--f-coeff", "0.68"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(r#""active_case": "override""#));
}
