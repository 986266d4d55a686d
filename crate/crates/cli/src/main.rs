// SPDX-License-Identifier: Apache-2.0

//! `qwalk` — command-line front end for the quantum walk toolkit.
//!
//! Two commands: `evolve` writes the reduced coin state of one initial
//! condition step by step; `figure` reproduces the data behind a named
//! figure. Output is CSV with a self-describing comment header, or JSON
//! with `--json`. Exit codes: 0 on success, 2 on configuration errors,
//! 3 on numerical-resolution failures.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::PartialConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn from_domain(err: qwalk::Error) -> Self {
        if err.is_config() {
            CliError::Config(err.to_string())
        } else {
            CliError::Numerical(err.to_string())
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Discrete-time quantum walk on a line: reduced coin dynamics, broken-link decoherence, trace-distance non-Markovianity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one initial coin state; emit t, p_left, p_right, Re q, Im q
    Evolve(CommonArgs),
    /// Reproduce the data behind a figure: fig1, fig1b, fig2, fig3, fig4, fig5
    Figure {
        /// Figure name
        name: String,
        #[command(flatten)]
        args: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Coin bias in [0, pi/2]; defaults to pi/4 (Hadamard)
    #[arg(long)]
    theta: Option<f64>,
    /// Polar Bloch angle of the initial coin state, in [0, pi]
    #[arg(long)]
    gamma: Option<f64>,
    /// Azimuthal Bloch angle of the initial coin state
    #[arg(long)]
    phi: Option<f64>,
    /// Polar angle of the second state (pair commands); defaults to the
    /// orthogonal partner of the first
    #[arg(long)]
    gamma2: Option<f64>,
    /// Azimuthal angle of the second state
    #[arg(long)]
    phi2: Option<f64>,
    /// Link-break probability per step, in [0, 1]
    #[arg(long)]
    p: Option<f64>,
    /// Number of time steps
    #[arg(long)]
    steps: Option<usize>,
    /// Engine: position, kspace, or mc
    #[arg(long)]
    engine: Option<String>,
    /// Quadrature size for the kspace engine (defaults to max(256, 8*steps))
    #[arg(long)]
    nk: Option<usize>,
    /// Trajectory count for the mc engine
    #[arg(long)]
    ntraj: Option<usize>,
    /// Root seed for trajectory ensembles
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (defaults to `<command>.csv` / `<command>.json`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit JSON instead of CSV
    #[arg(long)]
    json: bool,
    /// Flat key-value JSON config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn merged(&self) -> Result<PartialConfig, CliError> {
        let from_cli = PartialConfig {
            theta: self.theta,
            gamma: self.gamma,
            phi: self.phi,
            gamma2: self.gamma2,
            phi2: self.phi2,
            p: self.p,
            steps: self.steps,
            engine: self.engine.clone(),
            nk: self.nk,
            ntraj: self.ntraj,
            seed: self.seed,
            out: self.out.clone(),
        };
        Ok(match &self.config {
            Some(path) => from_cli.or(PartialConfig::from_file(path)?),
            None => from_cli,
        })
    }
}

fn run(cli: &Cli) -> Result<PathBuf, CliError> {
    let (label, args) = match &cli.command {
        Command::Evolve(args) => ("evolve".to_string(), args),
        Command::Figure { name, args } => (name.clone(), args),
    };
    let merged = args.merged()?;
    let (table, config) = match &cli.command {
        Command::Evolve(_) => commands::cmd_evolve(merged)?,
        Command::Figure { name, .. } => commands::cmd_figure(name, merged)?,
    };
    let extension = if args.json { "json" } else { "csv" };
    let path = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{label}.{extension}")));
    table.write(&path, args.json)?;
    Ok(path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(path) => {
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("qwalk: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
