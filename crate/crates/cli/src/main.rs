//! `circuitwalk`: build, verify and cross-check circuit walks from the
//! command line.

mod bench;
mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::exit::CliError;

#[derive(Parser, Debug)]
#[command(name = "circuitwalk", version, about = "Exact circuit walks on polyhedra {x : Ax = b, x >= 0}")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Walk from a feasible start to a target vertex and write the trace.
    Walk(WalkArgs),
    /// Verify a trace file against its instance.
    Verify(VerifyArgs),
    /// Run seeded walks over a generator family and write a CSV row per trial.
    Bench(BenchArgs),
    /// Shortest circuit walk by breadth-first search (tiny instances only).
    Oracle(OracleArgs),
    /// List all circuits of A.
    Circuits(EnumerationArgs),
    /// Circuit imbalance measure of A.
    Kappa(EnumerationArgs),
    /// Write a generated instance file.
    Gen(GenArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Any,
    Restricted,
}

#[derive(Args, Debug)]
pub struct WalkArgs {
    /// Instance file (JSON).
    pub instance: PathBuf,
    /// Start point, e.g. "1,0,1/2,0"; defaults to the file's "start".
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    /// Target vertex; defaults to the file's "target_vertex".
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    /// Target basis column indices, e.g. "1,3".
    #[arg(long)]
    pub target_basis: Option<String>,
    /// Objective c: walk to a vertex minimizing cᵀx.
    #[arg(long, allow_hyphen_values = true)]
    pub objective: Option<String>,
    #[arg(long, value_enum, default_value = "any")]
    pub mode: ModeArg,
    /// Seed for a random start when none is given.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override τ (the trace is marked uncertified).
    #[arg(long)]
    pub tau: Option<String>,
    /// Override λ (the trace is marked uncertified).
    #[arg(long)]
    pub lambda: Option<String>,
    /// Trace output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    pub trace: PathBuf,
    /// Also check cᵀx is non-increasing for this dual-feasible objective.
    #[arg(long, allow_hyphen_values = true)]
    pub objective: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Cube,
    Transportation,
    Network,
    Random,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Inclusive range "a..b" or a single value: d for cube, p for
    /// transportation, nodes − 1 for network, m for random.
    #[arg(long, default_value = "2..4")]
    pub m_range: String,
    /// Inclusive range: ignored for cube, q for transportation, arcs for
    /// network, n for random.
    #[arg(long, default_value = "4..8")]
    pub n_range: String,
    #[arg(long, default_value_t = 10)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "any")]
    pub mode: ModeArg,
    /// Entry bound for the random family.
    #[arg(long, default_value_t = 5)]
    pub magnitude: i64,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    pub instance: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub target: Option<String>,
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
    #[arg(long, default_value_t = 200_000)]
    pub nodes: usize,
    /// Candidate-support budget; defaults to $CIRCUITWALK_ENUM_BUDGET.
    #[arg(long)]
    pub budget: Option<u128>,
}

#[derive(Args, Debug)]
pub struct EnumerationArgs {
    pub instance: PathBuf,
    /// Candidate-support budget; defaults to $CIRCUITWALK_ENUM_BUDGET.
    #[arg(long)]
    pub budget: Option<u128>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// d for cube, p for transportation, nodes − 1 for network, m for random.
    #[arg(long)]
    pub m: usize,
    /// q for transportation, extra arcs for network, n for random.
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub magnitude: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(), CliError> = match cli.command {
        Command::Walk(args) => commands::walk(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Bench(args) => bench::run(&args),
        Command::Oracle(args) => commands::oracle(&args),
        Command::Circuits(args) => commands::circuits(&args),
        Command::Kappa(args) => commands::kappa(&args),
        Command::Gen(args) => commands::generate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("circuitwalk: {error}");
            ExitCode::from(error.code())
        }
    }
}
