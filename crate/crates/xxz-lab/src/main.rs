//! Command-line driver for the experiment runners.
//!
//! Exit codes: 0 all asserted bounds passed, 1 violations found, 2 usage
//! or runtime error.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use xxz_lab::experiments::{
    resolve_threads, runners, thread_pool, ExperimentConfig, OutputFormat,
};

#[derive(Parser)]
#[command(name = "xxz-lab", version, about = "Disorder-averaged diagnostics for the random XXZ chain")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration (unknown keys are errors).
    #[arg(long)]
    config: PathBuf,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Worker count; falls back to the config, then XXZ_LAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectrum structure: simple zero eigenvalue plus gap.
    SpectrumGap(RunArgs),
    /// Light-cone escape amplitudes over (r, s).
    Lightcone(RunArgs),
    /// Windowed locality error of local approximants over (ell, t).
    Locality(RunArgs),
    /// Low-window norm of separated occupancy products.
    Occupancy(RunArgs),
    /// Resolvent off-diagonal decay of the gap-shifted Hamiltonian.
    Resolvent(RunArgs),
    /// Smoothed-indicator bound suite.
    Smoothing(RunArgs),
    /// Interpolation-identity residuals under node doubling.
    Duhamel(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> xxz_lab::Result<bool> {
    let args = match &cli.cmd {
        Cmd::SpectrumGap(a)
        | Cmd::Lightcone(a)
        | Cmd::Locality(a)
        | Cmd::Occupancy(a)
        | Cmd::Resolvent(a)
        | Cmd::Smoothing(a)
        | Cmd::Duhamel(a) => a,
    };
    let cfg = ExperimentConfig::load(&args.config)?;
    let pool = thread_pool(resolve_threads(args.threads, cfg.threads))?;
    let table = match &cli.cmd {
        Cmd::SpectrumGap(_) => runners::run_gap_report(&cfg, &pool)?,
        Cmd::Lightcone(_) => runners::run_lightcone_map(&cfg, &pool)?,
        Cmd::Locality(_) => runners::run_locality_decay(&cfg, &pool)?,
        Cmd::Occupancy(_) => runners::run_occupancy_separation(&cfg, &pool)?,
        Cmd::Resolvent(_) => runners::run_resolvent_decay(&cfg, &pool)?,
        Cmd::Smoothing(_) => runners::run_smoothing_report(&cfg)?,
        Cmd::Duhamel(_) => runners::run_duhamel_check(&cfg, &pool)?,
    };
    table.emit(&args.out, args.format)?;
    eprintln!(
        "{} rows written to {} ({} violation(s))",
        table.num_rows(),
        args.out.display(),
        table.violations()
    );
    Ok(table.passed())
}
