//! `indentfit`: file-driven pipelines for identifying nonlinear Burgers
//! constants from indentation curves.
//!
//! Exit status: 0 success, 1 numerical failure, 2 I/O or malformed input,
//! 3 missing artifact from an earlier stage.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::StudyConfig;
use failure::Failure;
use output::Output;

#[derive(Parser, Debug)]
#[command(name = "indentfit", version, about = "Nonlinear viscoelastic calibration from indentation curves")]
struct Cli {
    /// Study configuration (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Existing directory for results.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for snapshot generation and GA evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the surrogate kernel.
    #[arg(long, global = true, value_parser = ["ls", "cs", "mq", "gs", "imq"])]
    kernel: Option<String>,
    /// Override the surrogate shape parameter c_j.
    #[arg(long, global = true)]
    cj: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the forward model at `[material]` for each condition.
    Simulate {
        /// Only these conditions (repeatable).
        #[arg(long)]
        condition: Vec<String>,
    },
    /// Orthogonal-array screening with ANOVA and one-at-a-time extremes.
    Sensitivity,
    /// Build one POD-RBF surrogate per condition.
    Train,
    /// Fit the free constants to each condition's `experiment` curve.
    Calibrate,
    /// Oliver-Pharr analysis of a measured curve.
    Analyze {
        /// Curve CSV with columns t_s,P_mN,h_nm.
        curve: PathBuf,
        /// Area function TOML with keys c0..c3.
        #[arg(long)]
        area: Option<PathBuf>,
        /// Apply the creep correction using the hold segment.
        #[arg(long)]
        ngan: bool,
    },
    /// Print the built-in configuration.
    PrintDefaults,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Sensitivity => "sensitivity",
            Command::Train => "train",
            Command::Calibrate => "calibrate",
            Command::Analyze { .. } => "analyze",
            Command::PrintDefaults => "print-defaults",
        }
    }
}

fn effective_config(cli: &Cli) -> Result<StudyConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => StudyConfig::load(path)?,
        None => StudyConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(kernel) = &cli.kernel {
        cfg.surrogate.kernel = kernel.clone();
    }
    if let Some(cj) = cli.cj {
        cfg.surrogate.shape = cj;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::PrintDefaults = cli.command {
        print!("{}", StudyConfig::defaults_text());
        return Ok(());
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot start thread pool: {e}")))?;
    }
    let cfg = effective_config(&cli)?;
    let out = Output::new(&cli.out, cli.command.name(), &cfg.hash())?;
    match &cli.command {
        Command::Simulate { condition } => commands::simulate(&cfg, &out, condition),
        Command::Sensitivity => commands::sensitivity(&cfg, &out),
        Command::Train => commands::train(&cfg, &out),
        Command::Calibrate => commands::calibrate(&cfg, &out, &cli.out),
        Command::Analyze { curve, area, ngan } => commands::analyze(&cfg, &out, curve, area.as_deref(), *ngan),
        Command::PrintDefaults => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("indentfit {command}: error: {e}");
            e.exit_code()
        }
    }
}
