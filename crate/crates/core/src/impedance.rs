//! Virtual impedance links between the ground robot and its anchors.
//!
//! Each link is a planar mass-spring-damper `m a + d v + k x = F_ext`
//! integrated with semi-implicit Euler. The robot is linked either to the
//! drone (formation tracking) or, while it is inside the influence zone of
//! one or more short obstacles, to those obstacles (local avoidance). The two
//! modes are exclusive.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{Obstacle, Vec2};

/// Virtual mass, stiffness, damping and the short-obstacle deflection coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpedanceParams {
    pub m: f64,
    pub k: f64,
    pub d: f64,
    pub f_coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("impedance parameter {field} = {value} violates {rule}")]
pub struct InvalidParams {
    pub field: &'static str,
    pub value: f64,
    pub rule: &'static str,
}

impl ImpedanceParams {
    pub fn new(m: f64, k: f64, d: f64, f_coeff: f64) -> Result<Self, InvalidParams> {
        let p = Self { m, k, d, f_coeff };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), InvalidParams> {
        let checks = [
            ("m", self.m, self.m > 0.0, "m > 0"),
            ("k", self.k, self.k > 0.0, "k > 0"),
            ("d", self.d, self.d >= 0.0, "d >= 0"),
            ("f_coeff", self.f_coeff, self.f_coeff >= 0.0, "f_coeff >= 0"),
        ];
        for (field, value, ok, rule) in checks {
            if !ok || !value.is_finite() {
                return Err(InvalidParams { field, value, rule });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkAnchor {
    DroneTarget,
    ShortObstacle(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceLink {
    pub anchor: LinkAnchor,
    /// Displacement state.
    pub delta_x: Vec2,
    /// Displacement rate.
    pub delta_v: Vec2,
    pub params: ImpedanceParams,
}

impl ImpedanceLink {
    pub fn at_rest(anchor: LinkAnchor, params: ImpedanceParams) -> Self {
        Self {
            anchor,
            delta_x: Vec2::ZERO,
            delta_v: Vec2::ZERO,
            params,
        }
    }

    pub fn acceleration(&self, f_ext: Vec2) -> Vec2 {
        let p = &self.params;
        (f_ext - self.delta_v * p.d - self.delta_x * p.k) * (1.0 / p.m)
    }

    /// ½m‖Δẋ‖² + ½k‖Δx‖²
    pub fn energy(&self) -> f64 {
        0.5 * self.params.m * self.delta_v.norm_squared()
            + 0.5 * self.params.k * self.delta_x.norm_squared()
    }
}

/// One semi-implicit Euler step of the link dynamics.
pub fn step_link(link: &ImpedanceLink, f_ext: Vec2, dt: f64) -> ImpedanceLink {
    debug_assert!(dt > 0.0);
    let accel = link.acceleration(f_ext);
    let delta_v = link.delta_v + accel * dt;
    let delta_x = link.delta_x + delta_v * dt;
    ImpedanceLink {
        anchor: link.anchor.clone(),
        delta_x,
        delta_v,
        params: link.params,
    }
}

/// Spring pull of the drone on the robot: `k * ((drone + offset) - robot)`.
pub fn external_force(
    drone_pos: Vec2,
    robot_pos: Vec2,
    params: &ImpedanceParams,
    offset: Vec2,
) -> Vec2 {
    (drone_pos + offset - robot_pos) * params.k
}

/// `f_coeff * r_imp`, the deflection length for a short obstacle.
pub fn deflection_magnitude(obstacle: &Obstacle, f_coeff: f64) -> f64 {
    f_coeff * obstacle.influence_radius
}

/// Displacement pushing the robot radially away from a short obstacle.
pub fn deflection(obstacle: &Obstacle, robot_pos: Vec2, f_coeff: f64) -> Vec2 {
    debug_assert!(obstacle.is_short());
    let dir = (robot_pos - obstacle.position)
        .normalized()
        .unwrap_or(Vec2::UNIT_X);
    dir * deflection_magnitude(obstacle, f_coeff)
}

/// Which links are live. Drone link and obstacle links never coexist.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinkTopology {
    obstacle_links: BTreeSet<String>,
}

impl LinkTopology {
    pub fn following() -> Self {
        Self::default()
    }

    pub fn avoiding<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            obstacle_links: ids.into_iter().map(Into::into).collect(),
        }
    }

    pub fn drone_link_active(&self) -> bool {
        self.obstacle_links.is_empty()
    }

    pub fn obstacle_links(&self) -> &BTreeSet<String> {
        &self.obstacle_links
    }

    /// `drone` or the `+`-joined obstacle ids, as logged.
    pub fn label(&self) -> String {
        if self.drone_link_active() {
            "drone".to_owned()
        } else {
            let ids: Vec<&str> = self.obstacle_links.iter().map(String::as_str).collect();
            format!("obstacle:{}", ids.join("+"))
        }
    }
}

/// Links every short obstacle whose surface is within its influence radius of the robot.
pub fn update_topology<'a>(
    robot_pos: Vec2,
    short_obstacles: impl IntoIterator<Item = &'a Obstacle>,
) -> LinkTopology {
    LinkTopology::avoiding(
        short_obstacles
            .into_iter()
            .filter(|o| o.is_short() && o.surface_distance(robot_pos) <= o.influence_radius)
            .map(|o| o.id.clone()),
    )
}

/// Link state owned by the follower: the drone link plus any live obstacle links.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSet {
    pub drone: ImpedanceLink,
    pub obstacles: BTreeMap<String, ImpedanceLink>,
}

impl LinkSet {
    pub fn new(params: ImpedanceParams) -> Self {
        Self {
            drone: ImpedanceLink::at_rest(LinkAnchor::DroneTarget, params),
            obstacles: BTreeMap::new(),
        }
    }

    /// Switches parameters on every link, keeping the current state.
    pub fn set_params(&mut self, params: ImpedanceParams) {
        self.drone.params = params;
        for link in self.obstacles.values_mut() {
            link.params = params;
        }
    }
}

/// Computes the robot's position target for this step and advances link state.
///
/// Following: the drone link is stepped under [`external_force`] and the
/// target is the drone projection plus offset plus the link displacement.
/// Avoiding: the drone link is held, each obstacle link carries its
/// deflection, and the target is the robot position plus the summed deflections.
#[allow(clippy::too_many_arguments)]
pub fn follower_target(
    drone_pos: Vec2,
    robot_pos: Vec2,
    topology: &LinkTopology,
    links: &mut LinkSet,
    short_obstacles: &[Obstacle],
    params: &ImpedanceParams,
    offset: Vec2,
    dt: f64,
) -> Vec2 {
    links.obstacles.retain(|id, _| topology.obstacle_links.contains(id));
    if topology.drone_link_active() {
        let f_ext = external_force(drone_pos, robot_pos, params, offset);
        links.drone = step_link(&links.drone, f_ext, dt);
        return drone_pos + offset + links.drone.delta_x;
    }
    let mut push = Vec2::ZERO;
    for id in &topology.obstacle_links {
        let Some(obstacle) = short_obstacles.iter().find(|o| &o.id == id) else {
            continue;
        };
        let link = links.obstacles.entry(id.clone()).or_insert_with(|| {
            ImpedanceLink::at_rest(LinkAnchor::ShortObstacle(id.clone()), *params)
        });
        link.delta_x = deflection(obstacle, robot_pos, params.f_coeff);
        link.delta_v = Vec2::ZERO;
        push += link.delta_x;
    }
    robot_pos + push
}
