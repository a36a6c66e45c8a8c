//! Step response of the virtual impedance link for every parameter row of
//! the bundled case database: overshoot, settling time and final offset.
//!
//! cargo run --example impedance_link

use swarmlink::impedance::{step_link, ImpedanceLink, LinkAnchor};
use swarmlink::{CaseDatabase, Vec2};

fn main() {
    let db = CaseDatabase::builtin();
    let force = Vec2::new(1.0, 0.0);
    let dt = 0.02;
    println!("{:>4} {:>5} {:>5} {:>5} {:>8} {:>9} {:>8}", "case", "m", "k", "d", "F/k", "overshoot", "settle_s");
    for rec in &db.records {
        let p = rec.params;
        let target = 1.0 / p.k;
        let mut link = ImpedanceLink::at_rest(LinkAnchor::DroneTarget, p);
        let mut peak = 0.0f64;
        let mut settled_at = None;
        for i in 1..=1500 {
            link = step_link(&link, force, dt);
            peak = peak.max(link.delta_x.x);
            let inside = (link.delta_x.x - target).abs() <= 0.02 * target;
            match (inside, settled_at) {
                (true, None) => settled_at = Some(i as f64 * dt),
                (false, Some(_)) => settled_at = None,
                _ => {}
            }
        }
        println!(
            "{:>4} {:>5.1} {:>5.1} {:>5.1} {:>8.4} {:>8.1}% {:>8.2}",
            rec.case_id.to_string(),
            p.m,
            p.k,
            p.d,
            link.delta_x.x,
            (peak / target - 1.0).max(0.0) * 100.0,
            settled_at.unwrap_or(f64::NAN)
        );
    }
}
