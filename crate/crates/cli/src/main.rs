use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lmg_rat_cli::{run, CliError, Command, Context, RunConfig, EXIT_PARTIAL};

#[derive(Parser)]
#[command(name = "lmg-rat", version, about = "Resonance-assisted tunneling in the kicked LMG model")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration; all keys are optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Keep rows already present in the output tables.
    #[arg(long, global = true)]
    resume: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Static spectra (cached) and quantum periods near the resonant energy.
    Spectrum,
    /// Stroboscopic sections for every configured kick strength.
    Poincare,
    /// Quantum splitting of the resonant pair.
    Splitting,
    /// Island geometry and pendulum parameters.
    Pendulum,
    /// Full sweep: classical table, quantum splittings, joined table and fits.
    Sweep,
    /// Fits from a stored classical table.
    Fit,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let code = match execute(&args) {
        Ok(0) => 0,
        Ok(n) => {
            log::warn!("{n} rows failed; see the status columns");
            EXIT_PARTIAL
        }
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(args: &Args) -> Result<usize, CliError> {
    if let Some(n) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--workers: {e}")))?;
    }
    let cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cmd = match args.command {
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Poincare => Command::Poincare,
        Cmd::Splitting => Command::Splitting,
        Cmd::Pendulum => Command::Pendulum,
        Cmd::Sweep => Command::Sweep,
        Cmd::Fit => Command::Fit,
    };
    let ctx = Context::new(cfg, args.out.clone(), args.resume);
    let report = run(cmd, &ctx)?;
    for f in &report.files {
        log::info!("wrote {}", f.display());
    }
    for f in &report.failures {
        log::warn!("{f}");
    }
    Ok(report.failures.len())
}
