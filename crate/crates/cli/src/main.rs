#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod error;
mod plot;
mod run;

use config::RunConfig;
use error::CliError;

/// Localized-complexity excess-risk bounds and model selection experiments.
#[derive(Debug, Parser)]
#[command(name = "riskbound", version)]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "RISKBOUND_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory receiving the CSV and JSON artifacts.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Render a JSON summary as SVG.
    Plot {
        summary: PathBuf,
        /// Output file; defaults to the summary path with an `.svg` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(config: &Path, seed: Option<u64>, out_dir: &Path) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let outcome = run::execute(&cfg)?;
    let (csv, json) = run::write_artifacts(&cfg, &outcome, out_dir)?;
    println!("{} -> {}, {}", outcome.line, csv.display(), json.display());
    Ok(())
}

fn plot(summary: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(summary).map_err(CliError::io(summary))?;
    let svg = plot::render(&text)?;
    let out = out.unwrap_or_else(|| summary.with_extension("svg"));
    std::fs::write(&out, svg).map_err(CliError::io(&out))?;
    println!("plot -> {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("riskbound: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run { config, seed, out_dir } => run(&config, seed, &out_dir),
        Command::Plot { summary, out } => plot(&summary, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("riskbound: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
