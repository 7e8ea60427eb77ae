//! `mgbm`: simulate and verify Brownian motions on metric graphs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod model;
mod verify;

/// Exit status: 0 all checks pass, 1 a check failed, 2 bad usage, 3 I/O.
#[derive(Debug)]
pub enum CliError {
    Check(String),
    Usage(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Check(m) | CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

pub type CliResult = Result<(), CliError>;

#[derive(Parser, Debug)]
#[command(name = "mgbm", version, about = "Brownian motion on metric graphs with Wentzell vertex conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a graph file and check its Wentzell data.
    Validate {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Solve the resolvent equation and sample u along every edge.
    Resolvent(ResolventArgs),
    /// Sample paths and dump them with their crossover chains.
    Simulate(SimulateArgs),
    /// Estimate vertex hitting transforms from a start point.
    HittingLt(EstimateArgs),
    /// Estimate the resolvent at a start point and compare with the solver.
    EstimateResolvent(EstimateArgs),
    /// Semigroup test of the crossover chain.
    ChainTest(ChainArgs),
    /// Run the acceptance suite, or the verification of one graph.
    Verify(VerifyArgs),
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(_) => Err(format!("`{s}` must be positive and finite")),
        Err(_) => Err(format!("`{s}` is not a number")),
    }
}

fn at_least_two(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(n) if n >= 2 => Ok(n),
        _ => Err(format!("`{s}`: need an integer of at least 2")),
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutArg {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Monte Carlo settings.
#[derive(Args, Debug, Clone)]
pub struct McArgs {
    /// Number of sample paths.
    #[arg(long, default_value_t = 100_000, value_parser = at_least_two)]
    pub paths: u64,
    /// Base time step h (steps are refined near vertices).
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub step: f64,
    /// Time horizon T [default: 20 / smallest λ].
    #[arg(long, value_parser = positive)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads, 0 for one per core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

impl McArgs {
    pub fn horizon_for(&self, lambdas: &[f64]) -> f64 {
        self.horizon
            .unwrap_or_else(|| 20.0 / lambdas.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

#[derive(Args, Debug)]
pub struct ResolventArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Spectral parameters, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5", value_parser = positive)]
    pub lambda: Vec<f64>,
    /// Right-hand side: const:<c>, bump:<point>:<w> or plateau:<point>:<r>:<w>.
    #[arg(long = "f", default_value = "const:1")]
    pub f: String,
    /// Samples per edge, endpoints included.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// Sampled length of external edges.
    #[arg(long, default_value_t = 5.0, value_parser = positive)]
    pub reach: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Start point: a vertex id or edge@x [default: first vertex].
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub paths: u64,
    /// Grid step h of the dump and of the fixed-step scheme.
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub step: f64,
    #[arg(long, default_value_t = 5.0, value_parser = positive)]
    pub horizon: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Start point: a vertex id or edge@x.
    #[arg(long)]
    pub start: String,
    #[arg(long, value_delimiter = ',', default_value = "0.5", value_parser = positive)]
    pub lambda: Vec<f64>,
    /// Right-hand side for estimate-resolvent.
    #[arg(long = "f", default_value = "const:1")]
    pub f: String,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct ChainArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Start vertex [default: first vertex carrying a shadow point].
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2", value_parser = positive)]
    pub lambda: Vec<f64>,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Graph to verify; without it the acceptance suite runs.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0.5", value_parser = positive)]
    pub lambda: Vec<f64>,
    #[arg(long = "f", default_value = "const:1")]
    pub f: String,
    /// Path count; for the suite, a cap on every criterion's count
    /// [default with --graph: 100000].
    #[arg(long, value_parser = at_least_two)]
    pub paths: Option<u64>,
    /// Paths per resolvent row with --graph. These paths run to the
    /// horizon, so they cost far more than hitting paths.
    #[arg(long, default_value_t = 10_000, value_parser = at_least_two)]
    pub resolvent_paths: u64,
    #[arg(long, default_value_t = 1e-3, value_parser = positive)]
    pub step: f64,
    #[arg(long, value_parser = positive)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Acceptance criteria to run, e.g. AC-3 [default: all].
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    #[command(flatten)]
    pub out: OutArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Validate { graph } => commands::validate(&graph),
        Command::Resolvent(a) => commands::resolvent(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::HittingLt(a) => commands::hitting_lt(&a),
        Command::EstimateResolvent(a) => commands::estimate_resolvent(&a),
        Command::ChainTest(a) => commands::chain_test(&a),
        Command::Verify(a) => verify::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
