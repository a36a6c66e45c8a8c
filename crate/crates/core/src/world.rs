//! Planar world model: vectors, obstacles, agent states, and scenario files.
//!
//! Scenario files are TOML documents:
//!
//! ```toml
//! name = "case1"
//! drone_start = [0.0, 0.0]
//! robot_start = [-0.6, 0.0]
//! goal = [4.0, 0.0]
//! goal_tolerance = 0.25          # optional, default 0.25
//!
//! [bounds]
//! min_x = -1.0
//! min_y = -2.0
//! max_x = 5.0
//! max_y = 2.0
//!
//! [[obstacle]]
//! id = "T1"
//! kind = "tall"                  # "tall" | "short"
//! position = [2.0, 0.4]
//! radius = 0.2
//! velocity = [0.0, 0.0]          # optional, default zero
//! influence_radius = 0.5         # optional, default radius + 0.3
//! ```
//!
//! Unknown keys are rejected.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default margin added to an obstacle radius when `influence_radius` is omitted.
pub const DEFAULT_INFLUENCE_MARGIN: f64 = 0.3;

/// Default goal tolerance in meters.
pub const DEFAULT_GOAL_TOLERANCE: f64 = 0.25;

/// A planar vector in meters (or meters/second for velocities).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };
    pub const UNIT_X: Vec2 = Vec2 { x: 1.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Checked constructor; rejects NaN and infinite components.
    pub fn try_new(x: f64, y: f64) -> Result<Self, NonFiniteVector> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(NonFiniteVector { x, y })
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0).then(|| Vec2::new(self.x / n, self.y / n))
    }

    /// Rescales the vector so its norm does not exceed `max`.
    pub fn clamp_norm(self, max: f64) -> Vec2 {
        let n = self.norm();
        if n > max && n > 0.0 {
            self * (max / n)
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("non-finite vector ({x}, {y})")]
pub struct NonFiniteVector {
    pub x: f64,
    pub y: f64,
}

impl TryFrom<[f64; 2]> for Vec2 {
    type Error = NonFiniteVector;

    fn try_from([x, y]: [f64; 2]) -> Result<Self, Self::Error> {
        Vec2::try_new(x, y)
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl std::iter::Sum for Vec2 {
    fn sum<I: Iterator<Item = Vec2>>(iter: I) -> Vec2 {
        iter.fold(Vec2::ZERO, |acc, v| acc + v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstacleKind {
    /// Blocks both agents; the drone plans around it.
    Tall,
    /// Below flight level; only the ground robot reacts to it.
    Short,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Obstacle {
    pub id: String,
    pub kind: ObstacleKind,
    pub position: Vec2,
    pub radius: f64,
    pub velocity: Vec2,
    /// Avoidance radius around the obstacle surface (`r_imp` for short obstacles).
    pub influence_radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleEntry {
    id: String,
    kind: ObstacleKind,
    position: Vec2,
    radius: f64,
    #[serde(default)]
    velocity: Vec2,
    influence_radius: Option<f64>,
}

impl<'de> Deserialize<'de> for Obstacle {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let e = ObstacleEntry::deserialize(deserializer)?;
        let influence_radius = e
            .influence_radius
            .unwrap_or(e.radius + DEFAULT_INFLUENCE_MARGIN);
        Ok(Obstacle {
            id: e.id,
            kind: e.kind,
            position: e.position,
            radius: e.radius,
            velocity: e.velocity,
            influence_radius,
        })
    }
}

impl Obstacle {
    pub fn new(id: impl Into<String>, kind: ObstacleKind, position: Vec2, radius: f64) -> Self {
        Self {
            id: id.into(),
            kind,
            position,
            radius,
            velocity: Vec2::ZERO,
            influence_radius: radius + DEFAULT_INFLUENCE_MARGIN,
        }
    }

    pub fn tall(id: impl Into<String>, position: Vec2, radius: f64) -> Self {
        Self::new(id, ObstacleKind::Tall, position, radius)
    }

    pub fn short(id: impl Into<String>, position: Vec2, radius: f64) -> Self {
        Self::new(id, ObstacleKind::Short, position, radius)
    }

    pub fn with_velocity(mut self, velocity: Vec2) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn with_influence_radius(mut self, influence_radius: f64) -> Self {
        self.influence_radius = influence_radius;
        self
    }

    pub fn is_tall(&self) -> bool {
        self.kind == ObstacleKind::Tall
    }

    pub fn is_short(&self) -> bool {
        self.kind == ObstacleKind::Short
    }

    pub fn is_dynamic(&self) -> bool {
        self.velocity != Vec2::ZERO
    }

    /// Distance from `p` to the obstacle surface (negative inside).
    pub fn surface_distance(&self, p: Vec2) -> f64 {
        self.position.distance(p) - self.radius
    }

    /// Advances a moving obstacle by one step, reflecting off the bounds.
    pub fn advance(&mut self, bounds: &Bounds, dt: f64) {
        if !self.is_dynamic() {
            return;
        }
        let mut p = self.position + self.velocity * dt;
        let mut v = self.velocity;
        let (lo_x, hi_x) = (bounds.min_x + self.radius, bounds.max_x - self.radius);
        let (lo_y, hi_y) = (bounds.min_y + self.radius, bounds.max_y - self.radius);
        if p.x < lo_x {
            p.x = 2.0 * lo_x - p.x;
            v.x = -v.x;
        } else if p.x > hi_x {
            p.x = 2.0 * hi_x - p.x;
            v.x = -v.x;
        }
        if p.y < lo_y {
            p.y = 2.0 * lo_y - p.y;
            v.y = -v.y;
        } else if p.y > hi_y {
            p.y = 2.0 * hi_y - p.y;
            v.y = -v.y;
        }
        self.position = p;
        self.velocity = v;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn diagonal(&self) -> f64 {
        (self.max_x - self.min_x).hypot(self.max_y - self.min_y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec2,
    pub velocity: Vec2,
    /// Flight altitude for the drone; informational only.
    pub altitude: f64,
}

impl AgentState {
    pub fn at(position: Vec2) -> Self {
        Self {
            position,
            velocity: Vec2::ZERO,
            altitude: 0.0,
        }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

fn default_goal_tolerance() -> f64 {
    DEFAULT_GOAL_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub drone_start: Vec2,
    pub robot_start: Vec2,
    pub goal: Vec2,
    #[serde(default = "default_goal_tolerance")]
    pub goal_tolerance: f64,
    pub bounds: Bounds,
    #[serde(rename = "obstacle", default)]
    pub obstacles: Vec<Obstacle>,
}

impl Scenario {
    pub fn tall_obstacles(&self) -> impl Iterator<Item = &Obstacle> {
        self.obstacles.iter().filter(|o| o.is_tall())
    }

    pub fn short_obstacles(&self) -> impl Iterator<Item = &Obstacle> {
        self.obstacles.iter().filter(|o| o.is_short())
    }

    pub fn has_dynamic_obstacles(&self) -> bool {
        self.obstacles.iter().any(Obstacle::is_dynamic)
    }

    /// Renders the scenario back to its file form.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }
}

/// A single broken scenario rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required field `{0}`")]
    MissingField(String),
    #[error("invalid scenario: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// 1-based line and column of a byte offset.
pub(crate) fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let prefix = &text[..offset.min(text.len())];
    let line = prefix.matches('\n').count() + 1;
    let column = prefix.rfind('\n').map_or(prefix.len(), |i| prefix.len() - i - 1) + 1;
    (line, column)
}

/// Maps a TOML decoding error onto a missing-field or a positioned syntax error.
pub(crate) fn classify_toml_error(text: &str, err: &toml::de::Error) -> (Option<String>, usize, usize) {
    let message = err.message();
    let missing = message
        .strip_prefix("missing field `")
        .and_then(|rest| rest.split('`').next())
        .map(str::to_owned);
    let (line, column) = err.span().map_or((1, 1), |s| line_column(text, s.start));
    (missing, line, column)
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| {
        let (missing, line, column) = classify_toml_error(text, &e);
        match missing {
            Some(field) => ScenarioError::MissingField(field),
            None => ScenarioError::Syntax {
                line,
                column,
                message: e.message().to_owned(),
            },
        }
    })?;
    let violations = validate_scenario(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid(violations))
    }
}

/// Checks every scenario invariant; an empty list means the scenario is valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let b = &s.bounds;
    let bounds_ok = [b.min_x, b.min_y, b.max_x, b.max_y]
        .iter()
        .all(|v| v.is_finite())
        && b.min_x < b.max_x
        && b.min_y < b.max_y;
    if !bounds_ok {
        out.push(Violation::new("bounds", "min < max on both axes"));
    }
    if !(s.goal_tolerance > 0.0 && s.goal_tolerance.is_finite()) {
        out.push(Violation::new("goal_tolerance", "goal_tolerance > 0"));
    }
    for (field, p) in [
        ("drone_start", s.drone_start),
        ("robot_start", s.robot_start),
        ("goal", s.goal),
    ] {
        if !p.is_finite() {
            out.push(Violation::new(field, "finite coordinates"));
        } else if bounds_ok && !b.contains(p) {
            let rule = if field == "goal" {
                "goal outside bounds"
            } else {
                "start outside bounds"
            };
            out.push(Violation::new(field, rule));
        }
    }

    let mut seen = HashSet::new();
    for (i, o) in s.obstacles.iter().enumerate() {
        let field = format!("obstacle[{i}]");
        if !seen.insert(o.id.as_str()) {
            out.push(Violation::new(
                format!("{field}.id"),
                "obstacle ids unique",
            ));
        }
        if !o.position.is_finite() || !o.velocity.is_finite() {
            out.push(Violation::new(field.clone(), "finite coordinates"));
        }
        if !(o.radius > 0.0 && o.radius.is_finite()) {
            out.push(Violation::new(format!("{field}.radius"), "radius > 0"));
        }
        if !(o.influence_radius >= o.radius && o.influence_radius.is_finite()) {
            out.push(Violation::new(
                format!("{field}.influence_radius"),
                "influence_radius >= radius",
            ));
        }
        for (start_field, p) in [("drone_start", s.drone_start), ("robot_start", s.robot_start)] {
            // Short obstacles sit below flight level.
            if start_field == "drone_start" && o.is_short() {
                continue;
            }
            if o.position.distance(p) < o.radius {
                out.push(Violation::new(
                    start_field,
                    format!("start inside obstacle {}", o.id),
                ));
            }
        }
    }
    out
}
