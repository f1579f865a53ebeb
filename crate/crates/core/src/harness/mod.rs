//! Experiment runner: configuration, closed-loop scenarios, metrics, CSV
//! logs and the comparison report.

mod config;
mod csv;
mod report;
mod scenario;

use std::path::PathBuf;

use thiserror::Error;

use crate::mpc::TrajectoryLog;

pub use config::{default_lyapunov_a, FuzzyConfig, ScenarioConfig};
pub use csv::{export_csv, parse_csv, write_csv, CsvRow, CSV_HEADER};
pub use report::compare_report;
pub use scenario::{
    build_controller, build_environment, compute_metrics, initial_fuzzy_model, run_scenario, RunMetrics,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("closed loop failed at t = {t:.3} s: {reason}")]
    Divergence {
        t: f64,
        reason: String,
        /// Records up to the failure.
        log: Box<TrajectoryLog>,
    },
    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("metrics need at least one logged step")]
    EmptyLog,
}

impl HarnessError {
    /// Process exit code: 1 configuration, 2 divergence, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Divergence { .. } | HarnessError::EmptyLog => 2,
            HarnessError::Io { .. } | HarnessError::Csv { .. } => 3,
        }
    }
}
