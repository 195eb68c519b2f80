//! Command-line front end: simulate gates, design and optimize pulses, and
//! analyse them. Every subcommand writes a run directory holding a
//! manifest, the input snapshot and CSV records.

mod commands;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use iongate::config::Config;
use iongate::lindblad::NoiseSource;

use crate::error::{CliError, Result};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "IONGATE_WORKERS";

#[derive(Parser)]
#[command(name = "iongate", version, about = "Trapped-ion Mølmer–Sørensen gate simulation and pulse design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured pulse and record the gate result and trajectories.
    Simulate(Common),
    /// Design a phase-space-closing pulse with the linear model.
    DesignSota(Common),
    /// Search for a robust feasible pulse with differential evolution.
    Optimize(Common),
    /// Infidelity of the configured pulse across motional drift.
    ScanRobustness(Common),
    /// Spectrum of the configured pulse, optionally of a mode trajectory too.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Also simulate and transform the configured mode's trajectory.
        #[arg(long)]
        trajectory: bool,
    },
    /// Leave-one-out infidelity attribution to each enabled noise source.
    NoiseBudget(Common),
    /// Feasibility search over a descending gate-time grid.
    GateTime(Common),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: yb7 or toy2.
    #[arg(long)]
    preset: Option<String>,
    /// Run directory.
    #[arg(long, default_value = "iongate-run")]
    out: PathBuf,
    /// Optimizer seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Gate time τ in µs.
    #[arg(long)]
    tau_us: Option<f64>,
    /// Segment count m.
    #[arg(long)]
    segments: Option<usize>,
    /// Detuning μ/2π in MHz.
    #[arg(long)]
    mu_mhz: Option<f64>,
    /// off, full, or only:SOURCE.
    #[arg(long)]
    noise: Option<String>,
}

impl Common {
    /// Loads the scenario and applies command-line overrides.
    pub fn config(&self) -> Result<Config> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(p), None) => Config::load(p)?,
            (None, Some(name)) => Config::preset(name)?,
            _ => return Err(CliError::Usage("give --config PATH or --preset NAME".into())),
        };
        if let Some(t) = self.tau_us {
            cfg.gate.gate_time_us = t;
        }
        if let Some(m) = self.segments {
            cfg.gate.segments = m;
        }
        if let Some(mu) = self.mu_mhz {
            cfg.gate.detuning_hz = Some(mu * 1e6);
        }
        if let Some(n) = &self.noise {
            cfg.noise.enabled = parse_noise(n)?;
        }
        if let Some(seed) = self.seed {
            if let Some(o) = cfg.optimizer.as_mut() {
                o.de.seed = seed;
            }
        }
        Ok(cfg)
    }
}

fn parse_noise(s: &str) -> Result<Vec<NoiseSource>> {
    match s {
        "off" => Ok(Vec::new()),
        "full" => Ok(NoiseSource::ALL.to_vec()),
        _ => match s.strip_prefix("only:") {
            Some(name) => Ok(vec![name.parse::<NoiseSource>()?]),
            None => Err(CliError::Usage(format!("--noise expects off, full or only:SOURCE, got `{s}`"))),
        },
    }
}

fn workers() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<PathBuf> {
    let workers = workers()?;
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate(c) => commands::simulate(&c, workers),
        Command::DesignSota(c) => commands::design_sota(&c, workers),
        Command::Optimize(c) => commands::optimize(&c, workers),
        Command::ScanRobustness(c) => commands::scan_robustness(&c, workers),
        Command::Spectrum { common, trajectory } => commands::spectrum(&common, trajectory, workers),
        Command::NoiseBudget(c) => commands::noise_budget(&c, workers),
        Command::GateTime(c) => commands::gate_time(&c, workers),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
