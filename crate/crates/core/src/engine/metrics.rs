use serde::{Deserialize, Serialize};

use super::log::{TrajectoryLog, TOPOLOGY_STALE, TOPOLOGY_WAITING};
use super::{ObstacleField, SimConfig};
use crate::world::{Scenario, Vec2};

/// Version of the JSON/CSV output schemas.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureReason {
    Timeout,
    Collision,
    Desync,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::Timeout => "Timeout",
            FailureReason::Collision => "Collision",
            FailureReason::Desync => "Desync",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub schema_version: u32,
    pub scenario: String,
    pub active_case: String,
    pub steps: u64,
    pub duration_s: f64,
    pub drone_path_length: f64,
    pub robot_path_length: f64,
    pub max_lateral_deviation: f64,
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    pub drone_speed_series: Vec<f64>,
    pub robot_speed_series: Vec<f64>,
}

impl Metrics {
    pub fn path_ratio(&self) -> f64 {
        self.robot_path_length / self.drone_path_length
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

/// Sum of segment lengths.
pub fn path_length(points: impl IntoIterator<Item = Vec2>) -> f64 {
    let mut it = points.into_iter();
    let Some(mut prev) = it.next() else {
        return 0.0;
    };
    let mut total = 0.0;
    for p in it {
        total += prev.distance(p);
        prev = p;
    }
    total
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Distance from `p` to the polyline through `vertices`.
pub fn point_polyline_distance(p: Vec2, vertices: &[Vec2]) -> f64 {
    match vertices {
        [] => f64::INFINITY,
        [only] => p.distance(*only),
        _ => vertices
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Largest distance from any `samples` point to the polyline through `path`.
pub fn max_polyline_deviation(samples: &[Vec2], path: &[Vec2]) -> f64 {
    let mut vertices: Vec<Vec2> = Vec::with_capacity(path.len());
    for p in path {
        if vertices.last() != Some(p) {
            vertices.push(*p);
        }
    }
    samples
        .iter()
        .map(|p| point_polyline_distance(*p, &vertices))
        .fold(0.0, f64::max)
}

/// Index of the first record where either agent touches an obstacle.
pub fn first_collision(log: &TrajectoryLog, scenario: &Scenario, config: &SimConfig) -> Option<usize> {
    let mut field = ObstacleField::new(scenario);
    let mut current_step = 0;
    for (i, r) in log.records.iter().enumerate() {
        while current_step < r.step {
            field.advance(config.dt);
            current_step += 1;
        }
        if field.collides(r.drone_position(), r.robot_position(), config) {
            return Some(i);
        }
    }
    None
}

/// Derives every metric from a trajectory log.
pub fn compute_metrics(log: &TrajectoryLog, scenario: &Scenario, config: &SimConfig) -> Metrics {
    let drone: Vec<Vec2> = log.drone_path().collect();
    let robot: Vec<Vec2> = log.robot_path().collect();
    let tol = config.goal_tolerance.unwrap_or(scenario.goal_tolerance);
    let at_goal = log.records.iter().position(|r| {
        r.drone_position().distance(scenario.goal) <= tol
            && r.robot_position().distance(scenario.goal) <= tol
    });
    let collision = first_collision(log, scenario, config);
    let last = log.records.last();

    let (success, failure_reason) = match (at_goal, collision) {
        (_, Some(c)) if at_goal.is_none_or(|g| c <= g) => (false, Some(FailureReason::Collision)),
        (Some(g), _) if log.records[g].step <= config.max_steps => (true, None),
        _ => {
            let desync = log.records.iter().any(|r| r.topology == TOPOLOGY_STALE)
                || last.is_some_and(|r| r.topology == TOPOLOGY_WAITING);
            let reason = if desync {
                FailureReason::Desync
            } else {
                FailureReason::Timeout
            };
            (false, Some(reason))
        }
    };

    Metrics {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.name.clone(),
        active_case: last.map(|r| r.active_case.clone()).unwrap_or_default(),
        steps: last.map_or(0, |r| r.step),
        duration_s: last.map_or(0.0, |r| r.t),
        drone_path_length: path_length(drone.iter().copied()),
        robot_path_length: path_length(robot.iter().copied()),
        max_lateral_deviation: max_polyline_deviation(&robot, &drone),
        success,
        failure_reason,
        drone_speed_series: log.records.iter().map(|r| r.drone_velocity().norm()).collect(),
        robot_speed_series: log.records.iter().map(|r| r.robot_velocity().norm()).collect(),
    }
}
