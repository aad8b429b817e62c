mod commands;
mod config;
mod error;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::SweepOptions;
use crate::error::Result;
use crate::plot::PlotKind;

/// Quantum state matching: synthesis, simulated sweeps, plots and readout mitigation.
#[derive(Parser)]
#[command(name = "qsmatch", version)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "QSMATCH_OUT_DIR", default_value = "qsmatch-out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize U_eps as a two-CNOT gate sequence.
    Decompose {
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
    },
    /// Run a configured parameter sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config shot count.
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Render a sweep CSV as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "success")]
        kind: PlotKind,
    },
    /// Apply readout mitigation to a sweep CSV.
    Mitigate { csv: PathBuf, confusion: PathBuf },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Decompose { epsilon } => {
            let r = commands::decompose(epsilon, &cli.out)?;
            println!("wrote {}", r.path.display());
            println!("residual {:.3e}, cnot_count {}", r.residual, r.cnot_count);
        }
        Command::Sweep { config, seed, shots } => {
            let r = commands::sweep(&SweepOptions {
                config: &config,
                seed,
                shots,
                out_dir: &cli.out,
            })?;
            println!("{} records, {} classified device-error", r.records, r.device_errors);
            for a in r.artifacts {
                println!("wrote {}", a.display());
            }
        }
        Command::Plot { csv, kind } => {
            let path = plot::plot(&csv, kind, &cli.out)?;
            println!("wrote {}", path.display());
        }
        Command::Mitigate { csv, confusion } => {
            let r = commands::mitigate_csv(&csv, &confusion, &cli.out)?;
            println!("mitigated {} rows, wrote {}", r.rows, r.path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
