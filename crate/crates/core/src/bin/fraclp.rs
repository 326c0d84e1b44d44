//! `fraclp run | sweep | plotdata`.
//!
//! Exit status: 0 on success, 1 for configuration errors, 2 when a run fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fraclp_core::config::{documented_defaults, parse_config, ExperimentConfig};
use fraclp_core::experiment::{emit_plotdata, run_single, run_sweep, RunSummary};

const CONFIG_ERROR: u8 = 1;
const RUNTIME_ERROR: u8 = 2;

fn defaults_help() -> String {
    format!(
        "Experiments are TOML files. Unknown keys are rejected; every key is optional.\n\
         Defaults:\n\n{}",
        documented_defaults()
    )
}

#[derive(Parser)]
#[command(name = "fraclp", version, about = "Sparse L^p-regularized optimization over fractional Sobolev spaces")]
#[command(after_long_help = defaults_help())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    #[command(after_long_help = defaults_help())]
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `[output] dir`.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Print the iteration table.
        #[arg(long)]
        verbose: bool,
    },
    /// Run every value of the `[sweep]` section and write summary.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write plot-ready CSVs into a finished run directory.
    Plotdata { run_dir: PathBuf },
}

fn load(path: &std::path::Path) -> Result<ExperimentConfig, ExitCode> {
    parse_config(path).map_err(|e| {
        eprintln!("fraclp: {e}");
        ExitCode::from(CONFIG_ERROR)
    })
}

fn print_run(s: &RunSummary, verbose: bool) {
    if verbose {
        for r in &s.outcome.records {
            println!(
                "k={:4} eps={:.3e} L={:.3e} trials={:2} phi={:.12e} step={:.3e} support={:.4}",
                r.k, r.eps_k, r.l_k, r.bt_trials, r.phi, r.step_v, r.support_fraction
            );
        }
    }
    let r = &s.report;
    println!(
        "{}: {} iterations, converged={}, phi={:.12e}, support={:.4}, residual={:.3e}, pairing_gap={:.3e}",
        s.dir.display(),
        r.iterations,
        r.converged,
        r.phi_final,
        r.support_fraction,
        r.residual_norm,
        r.pairing_gap
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output,
            verbose,
        } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if cfg.sweep.is_some() {
                eprintln!("fraclp: {} has a [sweep] section; use `fraclp sweep`", config.display());
                return ExitCode::from(CONFIG_ERROR);
            }
            let dir = output.unwrap_or_else(|| cfg.output.dir.clone());
            match run_single(&cfg, &dir) {
                Ok(s) => {
                    print_run(&s, verbose);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("fraclp: {e}");
                    ExitCode::from(RUNTIME_ERROR)
                }
            }
        }
        Command::Sweep { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if cfg.sweep.is_none() {
                eprintln!("fraclp: {} has no [sweep] section", config.display());
                return ExitCode::from(CONFIG_ERROR);
            }
            match run_sweep(&cfg, &cfg.output.dir) {
                Ok(runs) => {
                    for s in &runs {
                        print_run(s, false);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("fraclp: {e}");
                    ExitCode::from(RUNTIME_ERROR)
                }
            }
        }
        Command::Plotdata { run_dir } => match emit_plotdata(&run_dir) {
            Ok(files) => {
                for f in files {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("fraclp: {e}");
                ExitCode::from(RUNTIME_ERROR)
            }
        },
    }
}
