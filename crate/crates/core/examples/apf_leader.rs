//! Flies the aerial leader alone through a field of tall posts and prints
//! its path. Short obstacles are listed but never felt by the leader.
//!
//! cargo run --example apf_leader

use swarmlink::planner::{step_leader, total_force, ApfGains};
use swarmlink::world::AgentState;
use swarmlink::{Obstacle, Vec2};

fn main() {
    let goal = Vec2::new(6.0, 0.0);
    let obstacles = [
        Obstacle::tall("T1", Vec2::new(2.0, 0.3), 0.3),
        Obstacle::tall("T2", Vec2::new(4.0, -0.4), 0.25),
        Obstacle::short("S1", Vec2::new(3.0, 0.0), 0.2),
    ];
    let gains = ApfGains::default();
    let dt = 0.02;

    let mut drone = AgentState::at(Vec2::ZERO);
    let mut closest = f64::INFINITY;
    println!("{:>6} {:>8} {:>8} {:>6}", "t", "x", "y", "speed");
    for step in 0..2000 {
        let force = total_force(drone.position, goal, &obstacles, &gains);
        drone = step_leader(&drone, force, dt, gains.v_max);
        for o in obstacles.iter().filter(|o| o.is_tall()) {
            closest = closest.min(o.surface_distance(drone.position));
        }
        if step % 50 == 0 {
            let p = drone.position;
            println!("{:>6.2} {:>8.3} {:>8.3} {:>6.3}", step as f64 * dt, p.x, p.y, drone.speed());
        }
        if drone.position.distance(goal) < 0.05 {
            println!("reached goal after {:.2} s", step as f64 * dt);
            break;
        }
    }
    println!("closest approach to a tall post: {closest:.3} m");
}
