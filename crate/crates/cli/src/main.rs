use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Parser;
use spikelab_core::harness::{default_workers, run_experiment, Experiment, ExperimentConfig};

/// Seeded Monte Carlo experiments on deformed Wigner matrices.
///
/// Exit status: 0 when every verdict passes, 1 when any verdict fails,
/// 2 on a configuration or usage error.
#[derive(Debug, Parser)]
#[command(name = "spikelab", version)]
struct Args {
    /// Experiment to run; must match the `experiment` key of the config.
    experiment: Experiment,

    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,

    /// Master seed; replication r draws from a stream derived from (seed, r).
    #[arg(long)]
    seed: u64,

    /// Override the configured replication count.
    #[arg(long)]
    reps: Option<usize>,

    /// Worker threads [default: available CPUs].
    #[arg(long, env = "SPIKELAB_WORKERS")]
    workers: Option<usize>,

    /// Report path (JSON); falls back to the config's `outputs.report`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Raw-sample CSV path.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Plot-data TSV path.
    #[arg(long)]
    tsv: Option<PathBuf>,
}

fn run(args: Args) -> anyhow::Result<bool> {
    let mut config = ExperimentConfig::from_path(&args.config)?;
    if config.experiment != args.experiment {
        bail!(
            "command asks for '{}' but {} configures '{}'",
            args.experiment,
            args.config.display(),
            config.experiment
        );
    }
    if let Some(reps) = args.reps {
        config = config.with_reps(reps);
        config.validate()?;
    }
    let workers = match args.workers {
        Some(0) => bail!("--workers must be at least 1"),
        Some(w) => w,
        None => default_workers(),
    };
    let out = run_experiment(&config, args.seed, workers)?;

    match args.out.as_ref().or(config.outputs.report.as_ref()) {
        Some(path) => out.write_report(path)?,
        None => print!("{}", out.report.to_json()?),
    }
    if let Some(path) = args.csv.as_ref().or(config.outputs.csv.as_ref()) {
        out.write_csv(path)?;
    }
    if let Some(path) = args.tsv.as_ref().or(config.outputs.tsv.as_ref()) {
        out.write_tsv(path)?;
    }
    for v in &out.report.verdicts {
        eprintln!(
            "{} {}: {:.6} (threshold {:.6})",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.statistic,
            v.threshold
        );
    }
    for note in &out.report.notes {
        eprintln!("note: {note}");
    }
    Ok(out.report.all_pass())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let experiment = args.experiment;
    match run(args).with_context(|| format!("{experiment} failed")) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
