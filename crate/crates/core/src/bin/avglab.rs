use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use avglab::experiment::{list_experiments, run, write_orbit_csv, ExperimentConfig};
use avglab::orbit::{Multiplier, SeedPoint};

/// Averages of functions along exponential orbits.
#[derive(Parser)]
#[command(name = "avglab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config; exit 0 on pass, 2 on predicate failure, 1 on error.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides `sampling.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `threads`.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List experiments and the statement each reproduces.
    List,
    /// Dump `<alpha^n x>` for n < N as CSV.
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        n: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> avglab::Result<ExitCode> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let w = run(&cfg, &out, seed, threads)?;
            println!("trace: {}", w.trace.display());
            println!("summary: {}", w.summary.display());
            println!(
                "{}: {}",
                cfg.experiment,
                if w.pass { "pass" } else { "FAIL" }
            );
            Ok(ExitCode::from(if w.pass { 0 } else { 2 }))
        }
        Command::List => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{:<20} statement", "experiment")?;
            for (id, statement) in list_experiments() {
                writeln!(out, "{id:<20} {statement}")?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Orbit { alpha, x, n } => {
            let m = Multiplier::parse(&alpha)?;
            let x = SeedPoint::parse(&x)?;
            write_orbit_csv(std::io::stdout().lock(), &m, &x, n)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
