mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cycleflux::{GraphMode, RankKey};

/// Cycle-flux analysis of open quantum transport networks.
#[derive(Debug, Parser)]
#[command(name = "cycleflux", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// pump, transistor or network (overrides the config).
    #[arg(long, global = true)]
    model: Option<String>,
    /// JSON network file; implies `--model network`.
    #[arg(long, global = true)]
    network: Option<PathBuf>,
    /// Parameter override, e.g. `--set dT=0.2`. Repeatable.
    #[arg(long = "set", global = true, value_name = "NAME=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<GraphMode>,
    /// Number of ranked cycles to report; 0 means all.
    #[arg(long, global = true)]
    top_k: Option<usize>,
    /// traffic (max of the two directions) or net.
    #[arg(long, global = true, value_parser = parse_rank_key)]
    rank_key: Option<RankKey>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the primary output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<GraphMode, String> {
    s.parse().map_err(|e: cycleflux::NetworkError| e.to_string())
}

fn parse_rank_key(s: &str) -> Result<RankKey, String> {
    s.parse().map_err(|e: cycleflux::NetworkError| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steady state, currents, entropy production and top cycles.
    Analyze,
    /// Ranked cycle-flux table as CSV.
    Rank,
    /// Parameter sweep as CSV, one row per grid point.
    Sweep(commands::SweepArgs),
    /// Gillespie run with cycle-completion counting, compared with the analytic fluxes.
    Simulate(commands::SimulateArgs),
    /// Transistor switch threshold versus ω_M.
    Threshold(commands::ThresholdArgs),
    /// Transistor amplification factor and NDTC intervals.
    Amplify(commands::AmplifyArgs),
    /// Built network as JSON.
    Export,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = commands::Context::new(&cli.global).and_then(|ctx| match &cli.command {
        Command::Analyze => ctx.analyze(),
        Command::Rank => ctx.rank(),
        Command::Sweep(a) => ctx.sweep(a),
        Command::Simulate(a) => ctx.simulate(a),
        Command::Threshold(a) => ctx.threshold(a),
        Command::Amplify(a) => ctx.amplify(a),
        Command::Export => ctx.export(),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
