//! Batch front end. Exit codes: 0 success, 2 configuration error (nothing is
//! written), 3 runtime failure, 4 a run-level check did not hold.

mod artifacts;
mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::{bench, converge, optimize, order, plan, simulate, Run};
use config::read_config;
use error::{CliError, Result};

#[derive(Parser)]
#[command(name = "rsqs", version, about = "Grid quantum simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy)]
enum Kind {
    Simulate,
    Converge,
    OrderCheck,
    PotentialBench,
    Plan,
    Optimize,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one state and report norm, oracle and phase errors.
    Simulate(Args),
    /// Sweep the truncation number against the spectral error bound.
    Converge(Args),
    /// Fit product-formula error slopes against the dense oracle.
    OrderCheck(Args),
    /// Compare the tree code with direct Coulomb summation.
    PotentialBench(Args),
    /// Report truncation and step budgets.
    Plan(Args),
    /// Run the saddle-escaping optimizer over a range of seeds.
    Optimize(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `rng_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn parts(&self) -> (Kind, &Args) {
        match self {
            Command::Simulate(a) => (Kind::Simulate, a),
            Command::Converge(a) => (Kind::Converge, a),
            Command::OrderCheck(a) => (Kind::OrderCheck, a),
            Command::PotentialBench(a) => (Kind::PotentialBench, a),
            Command::Plan(a) => (Kind::Plan, a),
            Command::Optimize(a) => (Kind::Optimize, a),
        }
    }
}

fn prepare(kind: Kind, path: &Path, seed: Option<u64>) -> Result<Run> {
    macro_rules! load {
        ($ty:ty, $run:path) => {{
            let cfg: $ty = read_config(path)?;
            let seed = seed.or(cfg.rng_seed).unwrap_or(0);
            $run(cfg, seed)
        }};
    }
    match kind {
        Kind::Simulate => load!(simulate::SimulateConfig, simulate::run),
        Kind::Converge => load!(converge::ConvergeConfig, converge::run),
        Kind::OrderCheck => load!(order::OrderConfig, order::run),
        Kind::PotentialBench => load!(bench::BenchConfig, bench::run),
        Kind::Plan => load!(plan::PlanConfig, plan::run),
        Kind::Optimize => load!(optimize::OptimizeConfig, optimize::run),
    }
}

fn configure_threads() -> Result<()> {
    let Some(raw) = std::env::var_os("RSQS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .to_str()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Config(format!("RSQS_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Serialize)]
struct Timing {
    wall_seconds: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.parts();
    let fail = |e: CliError| {
        eprintln!("rsqs: {e}");
        ExitCode::from(e.exit_code() as u8)
    };
    let run = match configure_threads().and_then(|_| prepare(kind, &args.config, args.seed)) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let start = Instant::now();
    let mut art = match run() {
        Ok(a) => a,
        Err(e) => return fail(e),
    };
    let timing = Timing { wall_seconds: start.elapsed().as_secs_f64() };
    if let Err(e) = art.json("timing.json", &timing).and_then(|_| art.write_all(&args.out)) {
        return fail(e);
    }
    match &art.check_failure {
        Some(why) => {
            eprintln!("rsqs: check failed: {why}");
            ExitCode::from(4)
        }
        None => ExitCode::SUCCESS,
    }
}
