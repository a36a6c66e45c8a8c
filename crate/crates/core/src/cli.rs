//! Command-line front end.
//!
//! ```text
//! swarmlink run data/scenarios/case1.scn --log run.csv --metrics run.json
//! swarmlink batch data/scenarios --perturb 50 --out batch.csv
//! swarmlink retrieve data/scenarios/case1.scn
//! swarmlink validate my.scn
//! swarmlink replay run.csv --scenario data/scenarios/case1.scn
//! ```
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 run failure
//! under `--strict`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::engine::{self, perturb_scenario, run_batch, FailureReason, SimConfig, TrajectoryLog};
use crate::impedance::ImpedanceParams;
use crate::retrieval::{describe_scene, euclidean_distance, load_database, nearest_case, CaseDatabase, Embedder};
use crate::world::{parse_scenario, Scenario, ScenarioError};

#[derive(Debug, Parser)]
#[command(name = "swarmlink", version, about = "Drone-led ground robot simulator with impedance-coupled following")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario and print its metrics as JSON
    Run {
        scenario: PathBuf,
        /// Write the trajectory log (CSV) here
        #[arg(long)]
        log: Option<PathBuf>,
        /// Also write the metrics JSON here
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Simulate every *.scn file in a directory
    Batch {
        dir: PathBuf,
        /// Summary CSV destination
        #[arg(long)]
        out: PathBuf,
        /// Bus seeds, one run per seed
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// Replace each scenario by this many jittered copies
        #[arg(long, default_value_t = 0)]
        perturb: u64,
        /// Largest obstacle offset for --perturb, meters
        #[arg(long, default_value_t = 0.3)]
        jitter: f64,
    },
    /// Print the impedance case retrieved for a scenario
    Retrieve { scenario: PathBuf },
    /// Check a scenario file and list every violation
    Validate { scenario: PathBuf },
    /// Recompute metrics from a saved trajectory log
    Replay {
        log: PathBuf,
        /// Scenario the log was produced from
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Case database (defaults to the bundled six cases)
    #[arg(long, global = true)]
    pub db: Option<PathBuf>,
    /// Engine config file (TOML); flags below override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Exit with code 2 when a run fails
    #[arg(long, global = true)]
    pub strict: bool,

    #[arg(long, global = true, help_heading = "Simulation")]
    pub dt: Option<f64>,
    #[arg(long, global = true, help_heading = "Simulation")]
    pub max_steps: Option<u64>,
    #[arg(long, global = true, help_heading = "Simulation")]
    pub goal_tolerance: Option<f64>,

    #[arg(long, global = true, help_heading = "Leader")]
    pub k_att: Option<f64>,
    #[arg(long, global = true, help_heading = "Leader")]
    pub k_rep: Option<f64>,
    #[arg(long, global = true, help_heading = "Leader")]
    pub d_safe: Option<f64>,
    /// Drone speed limit, m/s
    #[arg(long, global = true, help_heading = "Leader")]
    pub v_max: Option<f64>,

    #[arg(long, global = true, help_heading = "Follower")]
    pub kp: Option<f64>,
    #[arg(long, global = true, help_heading = "Follower")]
    pub ki: Option<f64>,
    #[arg(long, global = true, help_heading = "Follower")]
    pub kd: Option<f64>,
    #[arg(long, global = true, help_heading = "Follower")]
    pub integral_limit: Option<f64>,
    /// Robot speed limit, m/s
    #[arg(long, global = true, help_heading = "Follower")]
    pub robot_v_max: Option<f64>,

    /// Virtual mass; with --k, --d and --f-coeff replaces retrieval
    #[arg(long, global = true, requires_all = ["k", "d", "f_coeff"], help_heading = "Impedance override")]
    pub m: Option<f64>,
    #[arg(long, global = true, requires_all = ["m", "d", "f_coeff"], help_heading = "Impedance override")]
    pub k: Option<f64>,
    #[arg(long, global = true, requires_all = ["m", "k", "f_coeff"], help_heading = "Impedance override")]
    pub d: Option<f64>,
    #[arg(long, global = true, requires_all = ["m", "k", "d"], help_heading = "Impedance override")]
    pub f_coeff: Option<f64>,

    #[arg(long, global = true, help_heading = "Bus")]
    pub latency_steps: Option<u64>,
    #[arg(long, global = true, help_heading = "Bus")]
    pub drop_prob: Option<f64>,
    #[arg(long, global = true, help_heading = "Bus")]
    pub seed: Option<u64>,
}

impl GlobalOpts {
    /// Config file (if any) with flag overrides applied, validated.
    pub fn sim_config(&self) -> Result<SimConfig, String> {
        let mut cfg = match &self.config {
            Some(p) => SimConfig::from_toml(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?,
            None => SimConfig::default(),
        };
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.dt, self.dt);
        set(&mut cfg.apf.k_att, self.k_att);
        set(&mut cfg.apf.k_rep, self.k_rep);
        set(&mut cfg.apf.d_safe, self.d_safe);
        set(&mut cfg.apf.v_max, self.v_max);
        set(&mut cfg.pid.kp, self.kp);
        set(&mut cfg.pid.ki, self.ki);
        set(&mut cfg.pid.kd, self.kd);
        set(&mut cfg.pid.integral_limit, self.integral_limit);
        set(&mut cfg.pid.v_max, self.robot_v_max);
        set(&mut cfg.bus.drop_probability, self.drop_prob);
        if let Some(n) = self.max_steps {
            cfg.max_steps = n;
        }
        if let Some(t) = self.goal_tolerance {
            cfg.goal_tolerance = Some(t);
        }
        if let Some(n) = self.latency_steps {
            cfg.bus.latency_steps = n;
        }
        if let Some(s) = self.seed {
            cfg.bus.rng_seed = s;
        }
        if let (Some(m), Some(k), Some(d), Some(f)) = (self.m, self.k, self.d, self.f_coeff) {
            cfg.params_override = Some(ImpedanceParams { m, k, d, f_coeff: f });
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn database(&self) -> Result<CaseDatabase, String> {
        match &self.db {
            Some(p) => load_database(p).map_err(|e| format!("{}: {e}", p.display())),
            None => Ok(CaseDatabase::builtin()),
        }
    }
}

#[derive(Serialize)]
struct RetrieveOutput<'a> {
    schema_version: u32,
    case_id: &'a str,
    m: f64,
    k: f64,
    d: f64,
    f_coeff: f64,
    descriptor: &'a str,
    distance: f64,
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_scenario(path: &Path) -> Result<Scenario, String> {
    parse_scenario(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn failure_code(strict: bool, failure: Option<FailureReason>) -> i32 {
    if strict && failure.is_some() {
        2
    } else {
        0
    }
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let entries = fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|x| x == "scn") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(format!("{}: no .scn files", dir.display()));
    }
    Ok(files)
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> Result<i32, String> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Run { scenario, log, metrics } => {
            let s = load_scenario(scenario)?;
            let cfg = opts.sim_config()?;
            let db = opts.database()?;
            let result = engine::run(&s, &cfg, &db).map_err(|e| e.to_string())?;
            let json = result.metrics.to_json();
            if let Some(p) = log {
                write(p, &result.log.to_csv_string())?;
            }
            if let Some(p) = metrics {
                write(p, &json)?;
            }
            println!("{json}");
            Ok(failure_code(opts.strict, result.metrics.failure_reason))
        }
        Command::Batch { dir, out, seeds, perturb, jitter } => {
            if !(*jitter >= 0.0 && jitter.is_finite()) {
                return Err("--jitter must be a non-negative number".into());
            }
            let mut scenarios = Vec::new();
            for path in scenario_files(dir)? {
                let base = load_scenario(&path)?;
                if *perturb == 0 {
                    scenarios.push(base);
                } else {
                    scenarios.extend((0..*perturb).map(|seed| perturb_scenario(&base, seed, *jitter)));
                }
            }
            let cfg = opts.sim_config()?;
            let db = opts.database()?;
            let summary = run_batch(&scenarios, &cfg, &db, seeds).map_err(|e| e.to_string())?;
            write(out, &summary.to_csv_string())?;
            eprintln!(
                "{} runs, {} succeeded: {}",
                summary.rows.len(),
                summary.successes(),
                engine::format_rate(summary.success_rate())
            );
            let failed = summary.successes() < summary.rows.len();
            Ok(if opts.strict && failed { 2 } else { 0 })
        }
        Command::Retrieve { scenario } => {
            let s = load_scenario(scenario)?;
            let db = opts.database()?;
            let descriptor = describe_scene(&s);
            let query = db.embedder().embed(&descriptor.text).map_err(|e| e.to_string())?;
            let hit = nearest_case(&db, &query).map_err(|e| e.to_string())?;
            let distance = euclidean_distance(&hit.embedding, &query).map_err(|e| e.to_string())?;
            let out = RetrieveOutput {
                schema_version: engine::SCHEMA_VERSION,
                case_id: &hit.case_id.0,
                m: hit.params.m,
                k: hit.params.k,
                d: hit.params.d,
                f_coeff: hit.params.f_coeff,
                descriptor: &descriptor.text,
                distance,
            };
            println!("{}", serde_json::to_string(&out).expect("retrieval output serializes"));
            Ok(0)
        }
        Command::Validate { scenario } => match parse_scenario(&read(scenario)?) {
            Ok(_) => {
                println!("{}: ok", scenario.display());
                Ok(0)
            }
            Err(ScenarioError::Invalid(violations)) => {
                for v in violations {
                    println!("{}: {v}", scenario.display());
                }
                Ok(1)
            }
            Err(e) => {
                println!("{}: {e}", scenario.display());
                Ok(1)
            }
        },
        Command::Replay { log, scenario } => {
            let s = load_scenario(scenario)?;
            let cfg = opts.sim_config()?;
            let file = fs::File::open(log).map_err(|e| format!("{}: {e}", log.display()))?;
            let trajectory = TrajectoryLog::read_csv(file).map_err(|e| format!("{}: {e}", log.display()))?;
            let metrics = engine::compute_metrics(&trajectory, &s, &cfg);
            println!("{}", metrics.to_json());
            Ok(failure_code(opts.strict, metrics.failure_reason))
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
