use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use config::RunConfig;
use error::CliError;
use output::Output;

#[derive(Parser)]
#[command(
    name = "rinzelkit",
    version,
    about = "FitzHugh-Rinzel simulation, certificates and kernel solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set a=-0.98` or `--set simulate.T=50`.
    #[arg(long = "set", value_name = "KEY=VAL")]
    set: Vec<String>,
    /// Worker threads for scans and kernel tables.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (default: `out` from the config, else `./out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the three-variable model and check the energy bound.
    Simulate(Common),
    /// Feasibility margins, certificate constants, absorbing ball.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Choose eps1 minimising C1/C.
        #[arg(long)]
        optimize_eps1: bool,
    },
    /// Certificate map over a two-parameter grid.
    Scan(Common),
    /// Scalar reduction under the first-integral constraints.
    FirstIntegral(Common),
    /// Recompute the worked example beside its quoted values.
    Replicate(Common),
    /// Tabulate the fundamental solution H = H1 - H2.
    Kernel(Common),
    /// Picard solution of the integral equation.
    Picard {
        #[command(flatten)]
        common: Common,
        /// Also run the method-of-lines solver and report the gap.
        #[arg(long)]
        crosscheck: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, which) = match &cli.command {
        Command::Simulate(c) => (c, "simulate"),
        Command::Certify { common, .. } => (common, "certify"),
        Command::Scan(c) => (c, "scan"),
        Command::FirstIntegral(c) => (c, "first-integral"),
        Command::Replicate(c) => (c, "replicate"),
        Command::Kernel(c) => (c, "kernel"),
        Command::Picard { common, .. } => (common, "picard"),
    };
    if let Some(n) = common.jobs {
        if n == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("--jobs: {e}")))?;
    }
    if common.config.is_none() && which != "replicate" {
        return Err(CliError::config(format!("{which} needs --config <path>")));
    }
    let cfg = RunConfig::load(common.config.as_deref(), &common.set)?;
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = Output::new(dir);
    match cli.command {
        Command::Simulate(_) => commands::simulate::run(&cfg, &out),
        Command::Certify { optimize_eps1, .. } => commands::certify::run(&cfg, optimize_eps1, &out),
        Command::Scan(_) => commands::scan::run(&cfg, &out),
        Command::FirstIntegral(_) => commands::first_integral::run(&cfg, &out),
        Command::Replicate(_) => commands::replicate::run(&out),
        Command::Kernel(_) => commands::kernel::run(&cfg, &out),
        Command::Picard { crosscheck, .. } => commands::picard::run(&cfg, crosscheck, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rinzelkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
