//! Scenario files, experiment orchestration and report emission for the
//! `collab-bench` binary.
//!
//! A run is `load_scenario` → [`Scenario::resolve`] → [`run`] →
//! [`Report::write_to`]. Every output is assembled in memory first and only
//! written once the whole experiment has succeeded.

mod experiments;
mod scenario;
mod table;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

pub use scenario::{
    load_scenario, parse_scenario, ClassifConfig, Experiment, Grids, McConfig, PoolSpec, Resolved, Scenario,
    Spacing, SweepAxis, SweepConfig, VerifyConfig, WelfareGapMode,
};
pub use table::{format_number, Cell, Table};

use crate::error::Error;

/// Failures of a bench run, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] Error),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("{context}: {source}")]
    Context { context: String, source: Box<BenchError> },
}

impl BenchError {
    /// `2` configuration, `3` infeasible verification floor, `4` solver
    /// non-convergence, `5` size refusal, `1` anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Model(e) => match e {
                Error::InfeasibleVerification { .. } => 3,
                Error::NonConvergence { .. } => 4,
                Error::TooLarge { .. } => 5,
                Error::InvalidParameter { .. }
                | Error::DegenerateEnv { .. }
                | Error::TypesNotStrict { .. }
                | Error::LengthMismatch { .. }
                | Error::IndexOutOfRange { .. } => 2,
                _ => 1,
            },
            BenchError::Io { .. } => 1,
            BenchError::Context { source, .. } => source.exit_code(),
        }
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        BenchError::Context { context: context.into(), source: Box::new(self) }
    }
}

/// Constants every output file is stamped with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derived {
    pub ratio_a_over_c: f64,
    pub outside_samples: f64,
    pub agents: Option<usize>,
    /// Relaxed pooled total for the full pool.
    pub pooled_target: Option<f64>,
    pub l_star: Option<usize>,
    /// `n° - 2(a/c)(theta_max - theta_min)`, possibly negative.
    pub q_floor_bound: f64,
    pub q_floor: Option<f64>,
    pub widened_floor_eta: Option<f64>,
    pub eta: Option<f64>,
}

/// Everything a run produces, keyed by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub files: Vec<(String, String)>,
    pub summary: Value,
}

impl Report {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Writes every file into `dir`. On failure the files already written
    /// are removed again.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
        let io = |path: &Path, e: std::io::Error| BenchError::Io { path: path.display().to_string(), message: e.to_string() };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        for (name, content) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, content) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(io(&path, e));
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Per-invocation overrides from the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Resolves `scenario` for `experiment` and runs it on a worker pool of the
/// requested size. Outputs do not depend on the number of workers.
pub fn run(scenario: &Scenario, experiment: Experiment, options: RunOptions) -> Result<Report, BenchError> {
    let resolved = scenario.resolve(experiment, options.seed)?;
    match options.workers {
        None => experiments::execute(&resolved),
        Some(0) => Err(BenchError::Config("--workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| BenchError::Config(format!("cannot start {n} workers: {e}")))?;
            pool.install(|| experiments::execute(&resolved))
        }
    }
}
