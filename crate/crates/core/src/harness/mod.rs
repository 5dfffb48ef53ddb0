//! Simulation runs and the studies built on them: energy diagnostics,
//! integrator timing, stable-step search and the resolution error study,
//! plus config parsing and file output.

mod benchmark;
mod config;
mod drift;
mod error_study;
mod export;
mod report;
mod run;
mod stability;

use std::path::PathBuf;

use thiserror::Error;

use crate::model::ModelError;
use crate::scenario::ConfigError;

pub use benchmark::{benchmark, machine_descriptor, BenchmarkCell, BenchmarkOptions, BenchmarkReport};
pub use config::{config_to_toml, load_config, parse_config, NON_PAPER_DEFAULT};
pub use drift::{drift_from_series, energy_drift_report, DriftReport, DriftVerdict};
pub use error_study::{
    resolution_error_study, ErrorStudyOptions, ErrorStudyReport, VariantResult, STATION_COUNT, TIME_BINS,
};
pub use export::{export_report, export_trajectory, parse_trajectory, render_trajectory, ParsedTrajectory};
pub use report::Report;
pub use run::{run_simulation, run_system, Outcome, Record, RunOptions, Trajectory, BLOWUP_FACTOR};
pub use stability::{max_stable_tau, StabilityOptions, StabilityProbe, StabilityReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("run did not complete: {0}")]
    Incomplete(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
