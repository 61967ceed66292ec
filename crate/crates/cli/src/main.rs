//! `sgq`: configuration-driven runner for ground states, logical-gate
//! protocols, phase scans and Ising-duality checks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod json;

use commands::{Failure, Outcome};
use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "sgq", version, about = "Spin-chain qubit simulator")]
struct Cli {
    /// Worker threads (falls back to SGQ_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print a one-line summary and the written paths to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Low-lying spectrum, ground degeneracy and ground-space observables.
    Ground(Args),
    /// Run a logical-gate protocol and report its logical action.
    Protocol(Args),
    /// Classify ladder phases over a grid of couplings.
    PhaseScan(Args),
    /// Kramers-Wannier duality checks of the transverse-field Ising chain.
    DualityCheck(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Experiment config (JSON).
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(short, long)]
    out_dir: Option<PathBuf>,
}

fn load(path: &PathBuf) -> Outcome<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn threads(flag: Option<usize>) -> Outcome<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("SGQ_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Config(format!("SGQ_THREADS={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(n) = threads(cli.threads)? {
        if n == 0 {
            return Err(Failure::Config("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let (args, f): (&Args, fn(&ExperimentConfig, Option<&PathBuf>) -> Outcome<commands::Written>) = match &cli.command {
        Command::Ground(a) => (a, commands::ground),
        Command::Protocol(a) => (a, commands::protocol),
        Command::PhaseScan(a) => (a, commands::phase_scan),
        Command::DualityCheck(a) => (a, commands::duality_check),
    };
    let cfg = load(&args.config)?;
    let written = f(&cfg, args.out_dir.as_ref())?;
    if cli.verbose {
        eprintln!("{}", written.summary);
        for p in &written.paths {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sgq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
