use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::Vec2;

/// Robot has not yet received target, pose and parameters.
pub const TOPOLOGY_WAITING: &str = "waiting";
/// Robot's last target is older than the staleness limit.
pub const TOPOLOGY_STALE: &str = "stale";

/// One row of the trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub t: f64,
    pub drone_x: f64,
    pub drone_y: f64,
    pub drone_vx: f64,
    pub drone_vy: f64,
    pub robot_x: f64,
    pub robot_y: f64,
    pub robot_vx: f64,
    pub robot_vy: f64,
    /// `drone`, `obstacle:<ids>`, `waiting` or `stale`.
    pub topology: String,
    pub active_case: String,
}

impl StepRecord {
    pub fn drone_position(&self) -> Vec2 {
        Vec2::new(self.drone_x, self.drone_y)
    }

    pub fn robot_position(&self) -> Vec2 {
        Vec2::new(self.robot_x, self.robot_y)
    }

    pub fn drone_velocity(&self) -> Vec2 {
        Vec2::new(self.drone_vx, self.drone_vy)
    }

    pub fn robot_velocity(&self) -> Vec2 {
        Vec2::new(self.robot_vx, self.robot_vy)
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("log steps must increase strictly (row {row}: step {step} after {prev})")]
    NonMonotonic { row: usize, step: u64, prev: u64 },
    #[error("log is empty")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryLog {
    pub records: Vec<StepRecord>,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn drone_path(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.records.iter().map(StepRecord::drone_position)
    }

    pub fn robot_path(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.records.iter().map(StepRecord::robot_position)
    }

    /// Writes the log as CSV with a header row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), LogError> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r)?;
        }
        if self.records.is_empty() {
            w.write_record([
                "step", "t", "drone_x", "drone_y", "drone_vx", "drone_vy", "robot_x", "robot_y",
                "robot_vx", "robot_vy", "topology", "active_case",
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads a log written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, LogError> {
        let mut rd = csv::Reader::from_reader(reader);
        let mut records: Vec<StepRecord> = Vec::new();
        for (row, rec) in rd.deserialize().enumerate() {
            let rec: StepRecord = rec?;
            if let Some(prev) = records.last() {
                if rec.step <= prev.step {
                    return Err(LogError::NonMonotonic {
                        row: row + 1,
                        step: rec.step,
                        prev: prev.step,
                    });
                }
            }
            records.push(rec);
        }
        if records.is_empty() {
            return Err(LogError::Empty);
        }
        Ok(Self { records })
    }
}
