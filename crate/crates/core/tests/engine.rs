mod common;

use common::{bundled_cases, load};
use swarmlink::engine::{compute_metrics, point_polyline_distance, run_direct, FailureReason, TOPOLOGY_WAITING};
use swarmlink::{run, CaseDatabase, SimConfig, TrajectoryLog, Vec2};

fn db() -> CaseDatabase {
    CaseDatabase::builtin()
}

#[test]
fn empty_scenario_goes_straight() {
    let s = load("empty.scn");
    let r = run(&s, &SimConfig::default(), &db()).unwrap();
    let m = &r.metrics;
    assert!(m.success, "{m:?}");
    assert!(m.max_lateral_deviation < 0.05);
    let first = &r.log.records[0];
    let last = r.log.records.last().unwrap();
    let drone_line = first.drone_position().distance(last.drone_position());
    let robot_line = first.robot_position().distance(last.robot_position());
    assert!((m.drone_path_length - drone_line).abs() <= 0.02 * drone_line);
    assert!((m.robot_path_length - robot_line).abs() <= 0.02 * robot_line);
    assert!(last.drone_position().distance(s.goal) <= s.goal_tolerance);
    assert!(last.robot_position().distance(s.goal) <= s.goal_tolerance);
}

#[test]
fn first_record_is_the_start_state() {
    let s = load("case1.scn");
    let r = run(&s, &SimConfig::default(), &db()).unwrap();
    let rec = &r.log.records[0];
    assert_eq!(rec.step, 0);
    assert_eq!(rec.drone_position(), s.drone_start);
    assert_eq!(rec.robot_position(), s.robot_start);
    assert_eq!(rec.topology, TOPOLOGY_WAITING);
    assert_eq!(r.log.records[1].active_case, "I");
}

#[test]
fn robot_sidesteps_short_obstacle_but_drone_does_not() {
    let s = load("case1.scn");
    let r = run(&s, &SimConfig::default(), &db()).unwrap();
    assert!(r.metrics.success);
    let short = s.short_obstacles().next().unwrap().clone();

    let mut without = s.clone();
    without.obstacles.retain(|o| o.is_tall());
    let base = run(&without, &SimConfig::default(), &db()).unwrap();
    let n = r.log.len().min(base.log.len());
    for (a, b) in r.log.records[..n].iter().zip(&base.log.records[..n]) {
        assert_eq!(a.drone_position(), b.drone_position());
    }

    let drone: Vec<Vec2> = r.log.drone_path().collect();
    let near: Vec<f64> = r
        .log
        .robot_path()
        .filter(|p| p.distance(short.position) < short.radius + short.influence_radius + 0.3)
        .map(|p| point_polyline_distance(p, &drone))
        .collect();
    assert!(!near.is_empty());
    assert!(near.iter().cloned().fold(0.0, f64::max) > 0.2);
    assert!(r.log.records.iter().any(|rec| rec.topology.starts_with("obstacle:")));
}

#[test]
fn bundled_cases_keep_robot_clear_of_obstacles() {
    let cfg = SimConfig::default();
    for s in bundled_cases() {
        let r = run(&s, &cfg, &db()).unwrap();
        assert!(r.metrics.success, "{}: {:?}", s.name, r.metrics.failure_reason);
        for rec in &r.log.records {
            for o in s.short_obstacles() {
                assert!(rec.robot_position().distance(o.position) >= o.radius + cfg.robot_radius);
            }
        }
    }
}

#[test]
fn bundled_cases_retrieve_their_rows() {
    let cfg = SimConfig::default();
    for (s, expected) in bundled_cases().iter().zip(["I", "II", "III"]) {
        let r = run(s, &cfg, &db()).unwrap();
        assert_eq!(r.metrics.active_case, expected);
    }
}

#[test]
fn log_round_trip_reproduces_metrics() {
    let s = load("case2.scn");
    let cfg = SimConfig::default();
    let r = run(&s, &cfg, &db()).unwrap();
    let text = r.log.to_csv_string();
    let back = TrajectoryLog::read_csv(text.as_bytes()).unwrap();
    assert_eq!(back, r.log);
    assert_eq!(compute_metrics(&back, &s, &cfg), r.metrics);
}

#[test]
fn runs_are_deterministic() {
    let s = load("case3.scn");
    let mut cfg = SimConfig::default();
    cfg.bus.latency_steps = 2;
    cfg.bus.drop_probability = 0.05;
    cfg.bus.rng_seed = 11;
    let a = run(&s, &cfg, &db()).unwrap();
    let b = run(&s, &cfg, &db()).unwrap();
    assert_eq!(a.log.to_csv_string(), b.log.to_csv_string());
    assert_eq!(a.metrics, b.metrics);
}

#[test]
fn transparent_bus_matches_direct_calls() {
    for s in bundled_cases() {
        let cfg = SimConfig::default();
        let a = run(&s, &cfg, &db()).unwrap();
        let b = run_direct(&s, &cfg, &db()).unwrap();
        assert_eq!(a.log, b.log, "{}", s.name);
    }
}

#[test]
fn latency_delays_the_robot() {
    let s = load("empty.scn");
    let mut cfg = SimConfig::default();
    cfg.bus.latency_steps = 5;
    let r = run(&s, &cfg, &db()).unwrap();
    // first publish at step 1 arrives at step 6
    assert!(r.log.records[..6].iter().all(|rec| rec.topology == TOPOLOGY_WAITING));
    assert_eq!(r.log.records[6].topology, "drone");
    assert!(r.metrics.success);
}

#[test]
fn total_message_loss_is_a_desync() {
    let s = load("empty.scn");
    let mut cfg = SimConfig::default();
    cfg.bus.drop_probability = 0.999_999;
    cfg.max_steps = 300;
    let r = run(&s, &cfg, &db()).unwrap();
    assert!(!r.metrics.success);
    assert_eq!(r.metrics.failure_reason, Some(FailureReason::Desync));
}

#[test]
fn short_step_budget_times_out() {
    let s = load("case1.scn");
    let cfg = SimConfig {
        max_steps: 50,
        ..SimConfig::default()
    };
    let r = run(&s, &cfg, &db()).unwrap();
    assert_eq!(r.metrics.failure_reason, Some(FailureReason::Timeout));
    assert_eq!(r.metrics.steps, 50);
}

#[test]
fn collision_ends_the_run() {
    // the drone passes a tall post that sits on the robot's straight line to it
    let mut s = load("empty.scn");
    s.drone_start = Vec2::new(1.5, 1.5);
    s.robot_start = Vec2::new(0.0, 0.0);
    s.goal = Vec2::new(4.0, 1.5);
    s.obstacles.push(swarmlink::Obstacle::tall("T", Vec2::new(0.6, 0.6), 0.2));
    let cfg = SimConfig::default();
    let r = run(&s, &cfg, &db()).unwrap();
    assert_eq!(r.metrics.failure_reason, Some(FailureReason::Collision));
    assert!(!r.metrics.success);
    assert!(r.metrics.steps < cfg.max_steps);
    let last = r.log.records.last().unwrap();
    assert!(last.robot_position().distance(Vec2::new(0.6, 0.6)) < 0.2 + cfg.robot_radius);
}

#[test]
fn dynamic_short_obstacle_changes_only_the_robot() {
    let cfg = SimConfig::default();
    let fixed = run(&load("case3.scn"), &cfg, &db()).unwrap();
    let moving = run(&load("case3_dynamic.scn"), &cfg, &db()).unwrap();
    assert!(moving.metrics.success);
    let n = fixed.log.len().min(moving.log.len());
    for (a, b) in fixed.log.records[..n].iter().zip(&moving.log.records[..n]) {
        assert_eq!(a.drone_position(), b.drone_position());
        assert_eq!(a.drone_velocity(), b.drone_velocity());
    }
    let robot_a: Vec<Vec2> = fixed.log.robot_path().take(n).collect();
    let robot_b: Vec<Vec2> = moving.log.robot_path().take(n).collect();
    assert_ne!(robot_a, robot_b);
}

#[test]
fn formation_offset_shifts_the_robot() {
    let s = load("empty.scn");
    let cfg = SimConfig {
        formation_offset: Vec2::new(0.0, 0.4),
        max_steps: 200,
        ..SimConfig::default()
    };
    let r = run(&s, &cfg, &db()).unwrap();
    let last = r.log.records.last().unwrap();
    assert!(last.robot_y > 0.2);
    assert!(last.drone_y.abs() < 1e-9);
}
