//! Experiment runner: configuration, seeded parallel replications, verdicts
//! and persisted reports.
//!
//! Replication `r` of a run with master seed `s` always draws from the stream
//! `mix64(s, r)`, and results are collected in replication order, so a report
//! does not depend on the number of workers.

mod config;
mod experiments;
mod report;

pub use config::{Experiment, ExperimentConfig, OutputPaths, ResolvedTolerances, Tolerances};
pub use experiments::{
    run_correction, run_esd, run_fluct, run_gaps, run_outliers, run_quadform, run_separation, ESD_SIZE_FLOOR,
};
pub use report::{histogram, histogram_auto, Cell, CsvTable, ExperimentReport, PlotData, Record, RunOutput};

use crate::error::{Error, Result};

/// Runs the configured experiment on a pool of `workers` threads.
pub fn run_experiment(config: &ExperimentConfig, master_seed: u64, workers: usize) -> Result<RunOutput> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| match config.experiment {
        Experiment::Outliers => run_outliers(config, master_seed),
        Experiment::Fluct => run_fluct(config, master_seed),
        Experiment::Correction => run_correction(config, master_seed),
        Experiment::Separation => run_separation(config, master_seed),
        Experiment::Esd => run_esd(config, master_seed),
        Experiment::Quadform => run_quadform(config, master_seed),
        Experiment::Gaps => run_gaps(config, master_seed),
    })
}

/// Default worker count: the available parallelism of the host.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
