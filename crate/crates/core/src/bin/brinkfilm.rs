//! Batch pipeline for the homogenized rough thin-film Darcy-Brinkman
//! models: cell problems, effective tensors, the macroscopic Reynolds
//! pressure, reconstructed fields, and the oracle verification suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use brinkfilm::config::RunConfig;
use brinkfilm::pipeline::{self, Stage};
use brinkfilm::verify;

#[derive(Parser)]
#[command(name = "brinkfilm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for independent solves (overrides the config).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the regime-appropriate cell problem and write the effective
    /// tensor.
    Cell(RunArgs),
    /// Cell solve plus the macroscopic pressure and average velocity.
    Macro(RunArgs),
    /// Full chain including temperature reconstruction and profile slices.
    Reconstruct(RunArgs),
    /// Full pipeline (same chain as `reconstruct`) with the run report.
    Run(RunArgs),
    /// Run oracle verification suites and print a pass/fail table as CSV.
    Verify {
        /// Suite name; omit or pass `all` to run everything.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Also write the table to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_stage(args: &RunArgs, stage: Stage) -> Result<bool, brinkfilm::Error> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    let report = pipeline::run_pipeline(&cfg, &args.out, stage)?;
    println!(
        "regime {}  tensor [[{:.6e}, {:.6e}], [{:.6e}, {:.6e}]]",
        report.regime,
        report.tensor.a[0][0],
        report.tensor.a[0][1],
        report.tensor.a[1][0],
        report.tensor.a[1][1],
    );
    if stage >= Stage::Macro {
        println!(
            "pressure solve: {} iterations, residual {:.3e}",
            report.pressure_iterations, report.pressure_residual
        );
    }
    for c in &report.checks {
        println!(
            "check {:<32} {:>13.6e} <= {:>13.6e}  {}",
            c.name,
            c.value,
            c.threshold,
            if c.pass { "ok" } else { "FAIL" }
        );
    }
    for f in &report.outputs {
        println!("wrote {}", args.out.join(f).display());
    }
    Ok(!report.failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Cell(a) => run_stage(a, Stage::Cell),
        Command::Macro(a) => run_stage(a, Stage::Macro),
        Command::Reconstruct(a) | Command::Run(a) => run_stage(a, Stage::Full),
        Command::Verify { suite, out } => (|| {
            let rows = verify::run_suite(suite)?;
            let csv = verify::rows_to_csv(&rows);
            print!("{csv}");
            if let Some(path) = out {
                std::fs::write(path, csv.as_bytes())?;
            }
            Ok(rows.iter().all(|r| r.pass))
        })(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
