//! Fixed-step simulation loop and its outputs.
//!
//! Each step: move dynamic obstacles, step the APF leader over tall
//! obstacles, publish the drone target / robot pose / parameters on the bus,
//! then let the robot update its link topology, compute its impedance
//! target and PID-step toward it. Metrics are always derived from the
//! trajectory log, so a persisted log reproduces them exactly.

mod batch;
mod log;
mod metrics;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use batch::{format_rate, perturb_scenario, run_batch, BatchRow, BatchSummary};
pub use log::{LogError, StepRecord, TrajectoryLog, TOPOLOGY_STALE, TOPOLOGY_WAITING};
pub use metrics::{
    compute_metrics, first_collision, max_polyline_deviation, path_length,
    point_polyline_distance, point_segment_distance, FailureReason, Metrics, SCHEMA_VERSION,
};

use crate::bus::{Bus, BusConfig, LastKnown, Payload, Topic};
use crate::follower::{pid_step, PidGains, PidState};
use crate::impedance::{follower_target, update_topology, ImpedanceParams, LinkSet, LinkTopology};
use crate::planner::{step_leader, total_force, ApfGains};
use crate::retrieval::{retrieve_case, CaseDatabase, RetrievalError};
use crate::world::{AgentState, Bounds, Obstacle, Scenario, Vec2};

/// Label used in the log when parameters come from an override.
pub const OVERRIDE_CASE: &str = "override";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionMode {
    /// Contact ends the run as a failure.
    #[default]
    Terminate,
    /// Contact is recorded as a failure but the run continues.
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub max_steps: u64,
    /// Overrides the scenario's goal tolerance when set.
    pub goal_tolerance: Option<f64>,
    pub collision: CollisionMode,
    pub robot_radius: f64,
    pub drone_radius: f64,
    pub drone_altitude: f64,
    /// Steps without a fresh drone target before the robot halts.
    pub stale_limit_steps: u64,
    pub formation_offset: Vec2,
    pub apf: ApfGains,
    pub pid: PidGains,
    pub bus: BusConfig,
    pub params_override: Option<ImpedanceParams>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            max_steps: 15_000,
            goal_tolerance: None,
            collision: CollisionMode::Terminate,
            robot_radius: 0.25,
            drone_radius: 0.1,
            drone_altitude: 1.0,
            stale_limit_steps: 50,
            formation_offset: Vec2::ZERO,
            apf: ApfGains::default(),
            pid: PidGains::default(),
            bus: BusConfig::default(),
            params_override: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Params(#[from] crate::impedance::InvalidParams),
    #[error("config file: {0}")]
    Parse(#[from] toml::de::Error),
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ConfigError::Invalid("dt > 0"));
        }
        if self.max_steps == 0 {
            return Err(ConfigError::Invalid("max_steps > 0"));
        }
        if self.goal_tolerance.is_some_and(|t| t <= 0.0) {
            return Err(ConfigError::Invalid("goal_tolerance > 0"));
        }
        if self.robot_radius < 0.0 || self.drone_radius < 0.0 {
            return Err(ConfigError::Invalid("agent radii >= 0"));
        }
        if !self.apf.is_valid() {
            return Err(ConfigError::Invalid("k_att > 0, k_rep >= 0, d_safe > 0, v_max > 0"));
        }
        if !self.pid.is_valid() {
            return Err(ConfigError::Invalid("PID gains >= 0, v_max > 0, integral_limit > 0"));
        }
        if !self.bus.is_valid() {
            return Err(ConfigError::Invalid("drop_probability in [0, 1)"));
        }
        if let Some(p) = &self.params_override {
            p.validate()?;
        }
        Ok(())
    }

    /// Parses an engine config file (TOML; every key optional).
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SimConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Obstacles as they evolve over a run.
#[derive(Debug, Clone)]
pub struct ObstacleField {
    bounds: Bounds,
    obstacles: Vec<Obstacle>,
}

impl ObstacleField {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            bounds: scenario.bounds,
            obstacles: scenario.obstacles.clone(),
        }
    }

    pub fn advance(&mut self, dt: f64) {
        for o in &mut self.obstacles {
            o.advance(&self.bounds, dt);
        }
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn short(&self) -> Vec<Obstacle> {
        self.obstacles.iter().filter(|o| o.is_short()).cloned().collect()
    }

    /// Robot disc against any obstacle, drone disc against tall obstacles.
    pub fn collides(&self, drone: Vec2, robot: Vec2, config: &SimConfig) -> bool {
        self.obstacles.iter().any(|o| {
            o.position.distance(robot) < o.radius + config.robot_radius
                || (o.is_tall() && o.position.distance(drone) < o.radius + config.drone_radius)
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub log: TrajectoryLog,
    pub metrics: Metrics,
    pub params: ImpedanceParams,
}

/// Resolves the impedance parameters for a run: override, else retrieval.
pub fn select_params(
    scenario: &Scenario,
    config: &SimConfig,
    db: &CaseDatabase,
) -> Result<(String, ImpedanceParams), RetrievalError> {
    match config.params_override {
        Some(p) => Ok((OVERRIDE_CASE.to_owned(), p)),
        None => {
            let hit = retrieve_case(scenario, db)?;
            Ok((hit.case_id.0.clone(), hit.params))
        }
    }
}

struct Follower {
    state: AgentState,
    pid: PidState,
    links: LinkSet,
    topology: Option<LinkTopology>,
    target: LastKnown<Vec2>,
    pose: LastKnown<Vec2>,
    params: LastKnown<(String, ImpedanceParams)>,
}

impl Follower {
    fn receive(&mut self, bus: &mut Bus, step: u64) {
        for m in bus.drain(Topic::DroneTarget, step) {
            if let Payload::Target(p) = m.payload {
                self.target.update(p, step);
            }
        }
        for m in bus.drain(Topic::RobotPose, step) {
            if let Payload::Pose(p) = m.payload {
                self.pose.update(p, step);
            }
        }
        for m in bus.drain(Topic::ImpedanceParams, step) {
            if let Payload::Params { case_id, params } = m.payload {
                self.links.set_params(params);
                self.params.update((case_id, params), step);
            }
        }
    }

    /// Advances the robot one step; returns the topology label.
    fn step(&mut self, shorts: &[Obstacle], config: &SimConfig, step: u64) -> String {
        let (Some(&target), Some(&pose), Some((_, params))) =
            (self.target.get(), self.pose.get(), self.params.get())
        else {
            self.halt();
            return TOPOLOGY_WAITING.to_owned();
        };
        if self.target.age(step).is_some_and(|a| a > config.stale_limit_steps) {
            self.halt();
            return TOPOLOGY_STALE.to_owned();
        }
        let params = *params;
        let topology = update_topology(pose, shorts);
        if self.topology.as_ref() != Some(&topology) {
            // the position error jumps on a link switch; skip one derivative
            self.pid.initialized = false;
        }
        let goal = follower_target(
            target,
            pose,
            &topology,
            &mut self.links,
            shorts,
            &params,
            config.formation_offset,
            config.dt,
        );
        let (command, pid) = pid_step(&self.pid, goal - pose, config.dt, &config.pid);
        self.pid = pid;
        self.state.velocity = command;
        self.state.position += command * config.dt;
        let label = topology.label();
        self.topology = Some(topology);
        label
    }

    fn halt(&mut self) {
        self.state.velocity = Vec2::ZERO;
    }

    fn case_label(&self) -> String {
        self.params.get().map(|(c, _)| c.clone()).unwrap_or_default()
    }
}

fn record(step: u64, config: &SimConfig, drone: &AgentState, robot: &AgentState, topology: String, case: String) -> StepRecord {
    StepRecord {
        step,
        t: step as f64 * config.dt,
        drone_x: drone.position.x,
        drone_y: drone.position.y,
        drone_vx: drone.velocity.x,
        drone_vy: drone.velocity.y,
        robot_x: robot.position.x,
        robot_y: robot.position.y,
        robot_vx: robot.velocity.x,
        robot_vy: robot.velocity.y,
        topology,
        active_case: case,
    }
}

/// Runs one scenario to completion, exchanging messages over the bus.
pub fn run(scenario: &Scenario, config: &SimConfig, db: &CaseDatabase) -> Result<SimResult, RetrievalError> {
    simulate(scenario, config, db, Some(Bus::with_standard_topics(config.bus)))
}

/// Same loop with the bus bypassed: the robot reads the drone state directly.
pub fn run_direct(scenario: &Scenario, config: &SimConfig, db: &CaseDatabase) -> Result<SimResult, RetrievalError> {
    simulate(scenario, config, db, None)
}

fn simulate(
    scenario: &Scenario,
    config: &SimConfig,
    db: &CaseDatabase,
    mut bus: Option<Bus>,
) -> Result<SimResult, RetrievalError> {
    let (case_id, params) = select_params(scenario, config, db)?;
    let tol = config.goal_tolerance.unwrap_or(scenario.goal_tolerance);
    let mut field = ObstacleField::new(scenario);
    let mut drone = AgentState {
        altitude: config.drone_altitude,
        ..AgentState::at(scenario.drone_start)
    };
    let mut robot = Follower {
        state: AgentState::at(scenario.robot_start),
        pid: PidState::default(),
        links: LinkSet::new(params),
        topology: None,
        target: LastKnown::default(),
        pose: LastKnown::default(),
        params: LastKnown::default(),
    };

    let mut log = TrajectoryLog::default();
    log.records.push(record(0, config, &drone, &robot.state, TOPOLOGY_WAITING.to_owned(), String::new()));

    for step in 1..=config.max_steps {
        field.advance(config.dt);

        let force = total_force(drone.position, scenario.goal, field.obstacles(), &config.apf);
        drone = step_leader(&drone, force, config.dt, config.apf.v_max);

        match bus.as_mut() {
            Some(bus) => {
                let mut publish = |topic, payload| {
                    bus.publish(topic, payload, step).expect("standard topics registered");
                };
                publish(Topic::DroneTarget, Payload::Target(drone.position));
                publish(Topic::RobotPose, Payload::Pose(robot.state.position));
                publish(
                    Topic::ImpedanceParams,
                    Payload::Params {
                        case_id: case_id.clone(),
                        params,
                    },
                );
                robot.receive(bus, step);
            }
            None => {
                robot.target.update(drone.position, step);
                robot.pose.update(robot.state.position, step);
                if robot.params.get().is_none() {
                    robot.links.set_params(params);
                    robot.params.update((case_id.clone(), params), step);
                }
            }
        }
        let shorts = field.short();
        let topology = robot.step(&shorts, config, step);

        log.records.push(record(step, config, &drone, &robot.state, topology, robot.case_label()));

        let collided = field.collides(drone.position, robot.state.position, config);
        if collided && config.collision == CollisionMode::Terminate {
            break;
        }
        if drone.position.distance(scenario.goal) <= tol
            && robot.state.position.distance(scenario.goal) <= tol
        {
            break;
        }
    }

    let metrics = compute_metrics(&log, scenario, config);
    Ok(SimResult {
        log,
        metrics,
        params,
    })
}
