//! Per-axis PID velocity controller for the ground robot.

use serde::{Deserialize, Serialize};

use crate::world::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Per-axis clamp on the accumulated integral.
    pub integral_limit: f64,
    /// Robot speed limit, m/s.
    pub v_max: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 1.2,
            ki: 0.0,
            kd: 0.1,
            integral_limit: 1.0,
            v_max: 0.6,
        }
    }
}

impl PidGains {
    pub fn is_valid(&self) -> bool {
        self.kp >= 0.0
            && self.ki >= 0.0
            && self.kd >= 0.0
            && self.v_max > 0.0
            && self.integral_limit > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: Vec2,
    pub prev_error: Vec2,
    pub initialized: bool,
}

/// One controller update. Returns the speed-clamped velocity command and the new state.
pub fn pid_step(state: &PidState, error: Vec2, dt: f64, gains: &PidGains) -> (Vec2, PidState) {
    debug_assert!(dt > 0.0);
    let lim = gains.integral_limit;
    let raw = state.integral + error * dt;
    let integral = Vec2::new(raw.x.clamp(-lim, lim), raw.y.clamp(-lim, lim));
    let derivative = if state.initialized {
        (error - state.prev_error) * (1.0 / dt)
    } else {
        Vec2::ZERO
    };
    let command = error * gains.kp + integral * gains.ki + derivative * gains.kd;
    let next = PidState {
        integral,
        prev_error: error,
        initialized: true,
    };
    (command.clamp_norm(gains.v_max), next)
}
