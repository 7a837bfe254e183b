//! `qecell` command line: run the builtin experiments or custom scenario
//! files, list what is available, and check the numerical invariant suite.

// `!(x > 0)`-style guards reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use config::{builtin, builtin_names, ScenarioConfig};

/// Environment variable holding the default output root.
const OUTPUT_ROOT_VAR: &str = "QECELL_OUT";

#[derive(Parser)]
#[command(
    name = "qecell",
    version,
    about = "Quasienergy spectra and resonance-cell dynamics of a driven Landau ladder"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a builtin scenario (fig1..fig6) or a TOML scenario file
    Run {
        /// Builtin name or path to a scenario file
        scenario: String,
        /// Output directory (overrides the scenario file and QECELL_OUT)
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the sample counts of series and averaging observables
        #[arg(long)]
        samples: Option<usize>,
        /// Worker threads for scan points and phase-space grids
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// List the builtin scenarios
    List,
    /// Run the invariant suite for a scenario's parameters and report
    /// pass/fail per check
    Check {
        /// Builtin name or path to a scenario file
        scenario: String,
        /// Worker threads
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
}

fn load_scenario(name_or_path: &str) -> Result<ScenarioConfig> {
    if let Some(config) = builtin(name_or_path) {
        return Ok(config);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        bail!(
            "'{name_or_path}' is neither a builtin scenario ({}) nor an existing file",
            builtin_names()
                .iter()
                .map(|(n, _)| *n)
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    ScenarioConfig::load(path)
}

fn resolve_out_dir(config: &ScenarioConfig, flag: Option<PathBuf>) -> PathBuf {
    if let Some(dir) = flag {
        return dir;
    }
    if let Some(dir) = &config.output.dir {
        return dir.clone();
    }
    let root = std::env::var_os(OUTPUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"));
    root.join(&config.name)
}

fn init_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build_global()
        .context("initializing the worker thread pool")
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for (name, description) in builtin_names() {
                println!("{name:<8} {description}");
            }
            println!(
                "{:<8} any TOML scenario file; see the README for the format",
                "custom"
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            scenario,
            out_dir,
            samples,
            threads,
        } => {
            init_threads(threads)?;
            let mut config = load_scenario(&scenario)?;
            if let Some(samples) = samples {
                if samples < 2 {
                    bail!("--samples must be at least 2");
                }
                config.schedule.series_points = Some(samples);
                config.schedule.average_samples = Some(samples);
            }
            let out_dir = resolve_out_dir(&config, out_dir);
            let report = runner::run_scenario(&config, &out_dir)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            println!(
                "wrote {} file(s) + manifest.toml to {}",
                report.files.len(),
                report.output_dir.display()
            );
            for (key, value) in &report.results {
                println!("  {key} = {value}");
            }
            if report.invariants_pass() {
                println!("invariant suite: all checks passed");
                Ok(ExitCode::SUCCESS)
            } else {
                for check in report.invariants.iter().filter(|c| !c.pass) {
                    eprintln!(
                        "invariant FAILED: {} observed {:.4e} > {:.1e}",
                        check.name, check.observed, check.threshold
                    );
                }
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Check { scenario, threads } => {
            init_threads(threads)?;
            let config = load_scenario(&scenario)?;
            let all_pass = runner::run_check(&config)?;
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
