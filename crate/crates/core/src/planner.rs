//! Artificial-potential-field leader planner.
//!
//! The drone is a first-order kinematic agent: the summed potential-field
//! force is used directly as a velocity setpoint and clamped to `v_max`.

use serde::{Deserialize, Serialize};

use crate::world::{AgentState, Obstacle, Vec2};

/// Floor on the obstacle surface distance, in meters.
pub const MIN_OBSTACLE_DISTANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApfGains {
    pub k_att: f64,
    pub k_rep: f64,
    /// Repulsion cut-off distance from the obstacle surface.
    pub d_safe: f64,
    /// Leader speed limit, m/s.
    pub v_max: f64,
}

impl Default for ApfGains {
    fn default() -> Self {
        Self {
            k_att: 1.0,
            k_rep: 1.0,
            d_safe: 1.0,
            v_max: 0.8,
        }
    }
}

impl ApfGains {
    pub fn is_valid(&self) -> bool {
        self.k_att > 0.0 && self.k_rep >= 0.0 && self.d_safe > 0.0 && self.v_max > 0.0
    }
}

/// Goal attraction, `k_att * (goal - pos)`.
pub fn attraction_force(pos: Vec2, goal: Vec2, k_att: f64) -> Vec2 {
    (goal - pos) * k_att
}

/// Repulsion of a single obstacle acting on `pos`.
///
/// Distance is measured to the obstacle surface and floored at
/// [`MIN_OBSTACLE_DISTANCE`]. A point exactly at the obstacle center is
/// pushed along +x.
pub fn repulsion_force(pos: Vec2, obstacle: &Obstacle, k_rep: f64, d_safe: f64) -> Vec2 {
    let away = pos - obstacle.position;
    let d_o = (away.norm() - obstacle.radius).max(MIN_OBSTACLE_DISTANCE);
    if d_o > d_safe {
        return Vec2::ZERO;
    }
    let magnitude = k_rep * (1.0 / d_o - 1.0 / d_safe);
    away.normalized().unwrap_or(Vec2::UNIT_X) * magnitude
}

/// Attraction plus the repulsion of every tall obstacle. Short obstacles are skipped.
pub fn total_force<'a>(
    pos: Vec2,
    goal: Vec2,
    obstacles: impl IntoIterator<Item = &'a Obstacle>,
    gains: &ApfGains,
) -> Vec2 {
    let repulsion: Vec2 = obstacles
        .into_iter()
        .filter(|o| o.is_tall())
        .map(|o| repulsion_force(pos, o, gains.k_rep, gains.d_safe))
        .sum();
    attraction_force(pos, goal, gains.k_att) + repulsion
}

/// Applies the force as a clamped velocity setpoint and takes one Euler step.
pub fn step_leader(state: &AgentState, force: Vec2, dt: f64, v_max: f64) -> AgentState {
    debug_assert!(dt > 0.0);
    let velocity = force.clamp_norm(v_max);
    AgentState {
        position: state.position + velocity * dt,
        velocity,
        altitude: state.altitude,
    }
}
