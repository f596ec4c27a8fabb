//! `mdlab`: run, sweep and verify the one-dimensional Maxwell-Dirac
//! reduction from a single JSON config.
//!
//! Exit status: 0 pass, 1 output I/O failure, 2 config error, 3 solver
//! abort, 4 verdict failure.

mod config;
mod failure;
mod norms;
mod output;
mod simulate;
mod sweep;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use failure::Failure;

#[derive(Parser)]
#[command(name = "mdlab", version, about = "Characteristic-grid Maxwell-Dirac experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Seed for randomized suites; overrides `seed` in the config.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one datum and write diagnostics, snapshots and a manifest.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Cross-check A_0 at the probes against the backward-cone charge.
        #[arg(long)]
        oracle: bool,
    },
    /// Run an eps campaign and evaluate the selected verdicts.
    Sweep(RunArgs),
    /// Run the estimate suites.
    Verify(RunArgs),
    /// Report L^p and H^s norms of the initial profile.
    Norms(RunArgs),
    /// Recompute verdicts from a finished output directory.
    Recheck {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn prepare(args: &RunArgs) -> Result<(RunConfig, PathBuf), Failure> {
    let mut cfg = RunConfig::load(&args.config)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if let Some(n) = args.jobs {
        if n == 0 {
            return Err(Failure::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot start {n} workers: {e}")))?;
    }
    let out = cfg.output_dir(args.out.as_deref())?;
    Ok((cfg, out))
}

fn recheck(dir: &Path) -> Result<String, Failure> {
    let mut done = Vec::new();
    if dir.join("summary.json").exists() {
        done.push(sweep::recheck(dir)?);
    }
    if dir.join("verify_report.json").exists() {
        done.push(verify::recheck(dir)?);
    }
    if done.is_empty() {
        return Err(Failure::Config(format!("{} holds no sweep or verify results", dir.display())));
    }
    Ok(done.join("; "))
}

fn dispatch(cmd: Command) -> Result<String, Failure> {
    match cmd {
        Command::Simulate { run, oracle } => {
            let (cfg, out) = prepare(&run)?;
            simulate::run(&cfg, &out, oracle)
        }
        Command::Sweep(run) => {
            let (cfg, out) = prepare(&run)?;
            sweep::run(&cfg, &out)
        }
        Command::Verify(run) => {
            let (cfg, out) = prepare(&run)?;
            verify::run(&cfg, &out)
        }
        Command::Norms(run) => {
            let (cfg, out) = prepare(&run)?;
            norms::run(&cfg, &out)
        }
        Command::Recheck { out } => recheck(&out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mdlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
