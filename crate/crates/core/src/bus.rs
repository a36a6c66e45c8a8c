//! Step-synchronous publish/subscribe bus with seeded latency and loss.
//!
//! Time is counted in engine steps. A message published at step `s` becomes
//! deliverable at `s + latency_steps` unless the seeded RNG drops it.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::impedance::ImpedanceParams;
use crate::world::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Topic {
    DroneTarget,
    RobotPose,
    ImpedanceParams,
}

impl Topic {
    pub const ALL: [Topic; 3] = [Topic::DroneTarget, Topic::RobotPose, Topic::ImpedanceParams];

    pub fn name(self) -> &'static str {
        match self {
            Topic::DroneTarget => "drone/target",
            Topic::RobotPose => "robot/pose",
            Topic::ImpedanceParams => "params/impedance",
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topic {
    type Err = BusError;

    fn from_str(s: &str) -> Result<Self, BusError> {
        Topic::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| BusError::UnknownTopic(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Target(Vec2),
    Pose(Vec2),
    Params {
        case_id: String,
        params: ImpedanceParams,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub topic: Topic,
    pub payload: Payload,
    pub publish_step: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BusConfig {
    pub latency_steps: u64,
    pub drop_probability: f64,
    pub rng_seed: u64,
}

impl Default for BusConfig {
    fn default() -> Self {
        Self {
            latency_steps: 0,
            drop_probability: 0.0,
            rng_seed: 0,
        }
    }
}

impl BusConfig {
    pub fn is_valid(&self) -> bool {
        (0.0..1.0).contains(&self.drop_probability)
    }

    /// True when the bus behaves exactly like direct calls.
    pub fn is_transparent(&self) -> bool {
        self.latency_steps == 0 && self.drop_probability == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BusError {
    #[error("unknown topic `{0}`")]
    UnknownTopic(String),
    #[error("topic `{0}` is not registered")]
    Unregistered(Topic),
}

/// One entry of the delivery log: what happened to each published message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeliveryEvent {
    pub topic: Topic,
    pub publish_step: u64,
    /// `None` when the message was dropped.
    pub due_step: Option<u64>,
}

#[derive(Debug)]
pub struct Bus {
    config: BusConfig,
    rng: ChaCha8Rng,
    queues: BTreeMap<Topic, VecDeque<(u64, Message)>>,
    log: Vec<DeliveryEvent>,
}

impl Bus {
    pub fn new(config: BusConfig) -> Self {
        Self {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            queues: BTreeMap::new(),
            log: Vec::new(),
        }
    }

    /// A bus with the three standard topics registered.
    pub fn with_standard_topics(config: BusConfig) -> Self {
        let mut bus = Self::new(config);
        for t in Topic::ALL {
            bus.register(t);
        }
        bus
    }

    pub fn register(&mut self, topic: Topic) {
        self.queues.entry(topic).or_default();
    }

    pub fn config(&self) -> &BusConfig {
        &self.config
    }

    pub fn publish(&mut self, topic: Topic, payload: Payload, current_step: u64) -> Result<(), BusError> {
        let queue = self
            .queues
            .get_mut(&topic)
            .ok_or(BusError::Unregistered(topic))?;
        // one draw per publish keeps the stream aligned regardless of outcome
        let dropped = self.rng.gen::<f64>() < self.config.drop_probability;
        let due = current_step + self.config.latency_steps;
        self.log.push(DeliveryEvent {
            topic,
            publish_step: current_step,
            due_step: (!dropped).then_some(due),
        });
        if !dropped {
            queue.push_back((
                due,
                Message {
                    topic,
                    payload,
                    publish_step: current_step,
                },
            ));
        }
        Ok(())
    }

    /// Publishes by topic name.
    pub fn publish_named(&mut self, topic: &str, payload: Payload, current_step: u64) -> Result<(), BusError> {
        self.publish(topic.parse()?, payload, current_step)
    }

    /// Removes and returns every message due at or before `current_step`, in publish order.
    pub fn drain(&mut self, topic: Topic, current_step: u64) -> Vec<Message> {
        let Some(queue) = self.queues.get_mut(&topic) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        // constant latency keeps each queue sorted by due step
        while queue.front().is_some_and(|(due, _)| *due <= current_step) {
            out.push(queue.pop_front().expect("front checked").1);
        }
        out
    }

    pub fn delivery_log(&self) -> &[DeliveryEvent] {
        &self.log
    }
}

/// Subscriber-side cache holding the last delivered value of a topic.
#[derive(Debug, Clone, PartialEq)]
pub struct LastKnown<T> {
    value: Option<T>,
    received_step: Option<u64>,
}

impl<T> Default for LastKnown<T> {
    fn default() -> Self {
        Self {
            value: None,
            received_step: None,
        }
    }
}

impl<T: Clone> LastKnown<T> {
    pub fn update(&mut self, value: T, step: u64) {
        self.value = Some(value);
        self.received_step = Some(step);
    }

    pub fn get(&self) -> Option<&T> {
        self.value.as_ref()
    }

    /// Steps since the last delivery, or `None` if nothing has arrived yet.
    pub fn age(&self, now: u64) -> Option<u64> {
        self.received_step.map(|s| now.saturating_sub(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target(i: u64) -> Payload {
        Payload::Target(Vec2::new(i as f64, 0.0))
    }

    #[test]
    fn zero_latency_same_step_fifo() {
        let mut bus = Bus::with_standard_topics(BusConfig::default());
        bus.publish(Topic::DroneTarget, target(1), 0).unwrap();
        bus.publish(Topic::DroneTarget, target(2), 0).unwrap();
        let got = bus.drain(Topic::DroneTarget, 0);
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].payload, target(1));
        assert_eq!(got[1].payload, target(2));
        assert!(bus.drain(Topic::DroneTarget, 0).is_empty());
    }

    #[test]
    fn latency_delays_exactly() {
        let mut bus = Bus::with_standard_topics(BusConfig {
            latency_steps: 3,
            ..BusConfig::default()
        });
        bus.publish(Topic::DroneTarget, target(7), 10).unwrap();
        for s in 10..13 {
            assert!(bus.drain(Topic::DroneTarget, s).is_empty());
        }
        let got = bus.drain(Topic::DroneTarget, 13);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].publish_step, 10);
    }

    #[test]
    fn nothing_published() {
        let mut bus = Bus::with_standard_topics(BusConfig::default());
        assert!(bus.drain(Topic::RobotPose, 5).is_empty());
    }

    #[test]
    fn unknown_and_unregistered_topics() {
        let mut bus = Bus::new(BusConfig::default());
        assert_eq!(
            bus.publish(Topic::DroneTarget, target(0), 0),
            Err(BusError::Unregistered(Topic::DroneTarget))
        );
        bus.register(Topic::DroneTarget);
        assert!(bus.publish_named("drone/target", target(0), 0).is_ok());
        assert_eq!(
            bus.publish_named("drone/plan", target(0), 0),
            Err(BusError::UnknownTopic("drone/plan".into()))
        );
    }

    fn replay(cfg: BusConfig) -> (Vec<DeliveryEvent>, Vec<u64>) {
        let mut bus = Bus::with_standard_topics(cfg);
        let mut seen = Vec::new();
        for s in 0..500 {
            bus.publish(Topic::DroneTarget, target(s), s).unwrap();
            seen.extend(bus.drain(Topic::DroneTarget, s).iter().map(|m| m.publish_step));
        }
        (bus.delivery_log().to_vec(), seen)
    }

    #[test]
    fn seeded_drops_replay_identically() {
        let cfg = BusConfig {
            latency_steps: 2,
            drop_probability: 1.0 - 1e-3,
            rng_seed: 42,
        };
        let (a, sa) = replay(cfg);
        let (b, sb) = replay(cfg);
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert!(sa.len() < 10);
        let (c, _) = replay(BusConfig { rng_seed: 43, ..cfg });
        assert_eq!(c.len(), a.len());
    }

    #[test]
    fn lossless_when_drop_zero() {
        let (log, seen) = replay(BusConfig {
            latency_steps: 4,
            drop_probability: 0.0,
            rng_seed: 9,
        });
        assert!(log.iter().all(|e| e.due_step.is_some()));
        assert_eq!(seen, (0..496).collect::<Vec<_>>());
    }

    #[test]
    fn last_known_value_survives_drops() {
        let mut bus = Bus::with_standard_topics(BusConfig {
            drop_probability: 0.5,
            rng_seed: 1,
            ..BusConfig::default()
        });
        let mut cache = LastKnown::default();
        let mut dropped_any = false;
        for s in 0..50 {
            bus.publish(Topic::DroneTarget, target(s), s).unwrap();
            let msgs = bus.drain(Topic::DroneTarget, s);
            if msgs.is_empty() {
                dropped_any = true;
                if s > 0 && cache.get().is_some() {
                    assert!(cache.age(s).unwrap() >= 1);
                }
            }
            for m in msgs {
                cache.update(m.payload, s);
            }
        }
        assert!(dropped_any);
        assert!(cache.get().is_some());
    }

    #[test]
    fn topic_names() {
        for t in Topic::ALL {
            assert_eq!(t.name().parse::<Topic>().unwrap(), t);
        }
    }
}
