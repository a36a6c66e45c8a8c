//! Deterministic simulator of a heterogeneous leader-follower pair.
//!
//! An aerial leader plans with an artificial potential field over tall
//! obstacles. A ground robot follows it through a virtual impedance link and
//! switches to local impedance links around short obstacles that the leader
//! ignores. Impedance parameters come from a small case database, selected by
//! exact nearest-neighbour search over embedded scene descriptions.
//!
//! Modules, bottom-up:
//!
//! - [`world`]: vectors, obstacles, scenarios and the scenario file format
//! - [`planner`]: potential-field forces and the leader motion law
//! - [`impedance`]: mass-spring-damper links, deflection, link topology
//! - [`follower`]: PID velocity controller
//! - [`retrieval`]: scene describer, hashing embedder, case database
//! - [`bus`]: step-synchronous pub/sub with latency and loss
//! - [`engine`]: the simulation loop, logs, metrics and batches
//! - [`cli`]: the `swarmlink` command line
//!
//! See `examples/` for one runnable program per capability.

pub mod bus;
pub mod cli;
pub mod engine;
pub mod follower;
pub mod impedance;
pub mod planner;
pub mod retrieval;
pub mod world;

pub use engine::{run, run_batch, Metrics, SimConfig, SimResult, TrajectoryLog};
pub use impedance::ImpedanceParams;
pub use retrieval::CaseDatabase;
pub use world::{parse_scenario, Obstacle, ObstacleKind, Scenario, Vec2};
