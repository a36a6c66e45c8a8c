//! The robot's PID velocity loop chasing a point that moves on a circle,
//! with and without a derivative term.
//!
//! cargo run --example pid_tracking

use swarmlink::follower::{pid_step, PidGains, PidState};
use swarmlink::Vec2;

fn track(gains: &PidGains) -> (f64, f64) {
    let dt = 0.02;
    let mut pos = Vec2::ZERO;
    let mut state = PidState::default();
    let mut worst = 0.0f64;
    let mut sum = 0.0;
    let n = 1500;
    for i in 0..n {
        let t = i as f64 * dt;
        let target = Vec2::new(1.0 + (0.3 * t).cos(), (0.3 * t).sin());
        let (v, next) = pid_step(&state, target - pos, dt, gains);
        state = next;
        pos += v * dt;
        // skip the initial approach
        if t > 10.0 {
            let err = pos.distance(target);
            worst = worst.max(err);
            sum += err;
        }
    }
    (worst, sum / (n - 500) as f64)
}

fn main() {
    let base = PidGains::default();
    for (name, gains) in [
        ("default", base),
        ("no derivative", PidGains { kd: 0.0, ..base }),
        ("with integral", PidGains { ki: 0.3, ..base }),
        ("stiff", PidGains { kp: 3.0, ..base }),
    ] {
        let (worst, mean) = track(&gains);
        println!("{name:>14}: max error {worst:.3} m, mean {mean:.3} m");
    }
}
