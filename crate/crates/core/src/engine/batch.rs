use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{run, Metrics, SimConfig, SCHEMA_VERSION};
use crate::retrieval::{CaseDatabase, RetrievalError};
use crate::world::{validate_scenario, Scenario, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub index: usize,
    pub seed: u64,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub rows: Vec<BatchRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    schema_version: u32,
    index: usize,
    scenario: &'a str,
    seed: u64,
    active_case: &'a str,
    success: bool,
    failure_reason: &'a str,
    steps: u64,
    drone_path_length: f64,
    robot_path_length: f64,
    path_ratio: f64,
    max_lateral_deviation: f64,
}

impl BatchSummary {
    pub fn successes(&self) -> usize {
        self.rows.iter().filter(|r| r.metrics.success).count()
    }

    pub fn success_rate(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.successes() as f64 / self.rows.len() as f64
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            let m = &r.metrics;
            w.serialize(CsvRow {
                schema_version: SCHEMA_VERSION,
                index: r.index,
                scenario: &m.scenario,
                seed: r.seed,
                active_case: &m.active_case,
                success: m.success,
                failure_reason: m.failure_reason.map_or("", |f| f.as_str()),
                steps: m.steps,
                drone_path_length: m.drone_path_length,
                robot_path_length: m.robot_path_length,
                path_ratio: m.path_ratio(),
                max_lateral_deviation: m.max_lateral_deviation,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Percentage with one decimal and its rounded form, e.g. `91.7% (92%)`.
pub fn format_rate(rate: f64) -> String {
    format!("{:.1}% ({:.0}%)", rate * 100.0, rate * 100.0)
}

/// Runs every (scenario, seed) pair; the seed drives the bus RNG.
///
/// Runs execute in parallel; rows come back in input order
/// (scenario-major, then seed).
pub fn run_batch(
    scenarios: &[Scenario],
    config: &SimConfig,
    db: &CaseDatabase,
    seeds: &[u64],
) -> Result<BatchSummary, RetrievalError> {
    let jobs: Vec<(usize, &Scenario, u64)> = scenarios
        .iter()
        .flat_map(|s| seeds.iter().map(move |seed| (s, *seed)))
        .enumerate()
        .map(|(i, (s, seed))| (i, s, seed))
        .collect();
    let rows = jobs
        .into_par_iter()
        .map(|(index, scenario, seed)| {
            let mut cfg = config.clone();
            cfg.bus.rng_seed = seed;
            run(scenario, &cfg, db).map(|r| BatchRow {
                index,
                seed,
                metrics: r.metrics,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BatchSummary { rows })
}

/// Moves every obstacle by a seeded random offset of at most `max_offset`
/// meters. Draws that would invalidate the scenario are repeated.
pub fn perturb_scenario(base: &Scenario, seed: u64, max_offset: f64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let mut s = base.clone();
        s.name = format!("{}~{seed}", base.name);
        for o in &mut s.obstacles {
            let offset = loop {
                let v = Vec2::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                if v.norm() <= 1.0 {
                    break v * max_offset;
                }
            };
            o.position += offset;
        }
        if validate_scenario(&s).is_empty() {
            return s;
        }
    }
    base.clone()
}
