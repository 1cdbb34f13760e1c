//! Seeded benchmark sweeps.
//!
//! CSV columns: `family,m,n,seed,length,budget,phase1_steps,
//! norm_reduction_steps,eliminations,max_decomposition_size,runtime_ms`.

use std::time::Instant;

use circuitwalk::instances::{random_feasible_point, random_vertex};
use circuitwalk::verify::verify_trace;
use circuitwalk::walk::{run_walk, StepKind, WalkMode};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{mode, spec, write_output};
use crate::exit::CliError;
use crate::{BenchArgs, Family};

pub const HEADER: &str = "family,m,n,seed,length,budget,phase1_steps,norm_reduction_steps,eliminations,max_decomposition_size,runtime_ms";

#[derive(Debug, Serialize)]
struct Row {
    family: &'static str,
    m: usize,
    n: usize,
    seed: u64,
    length: usize,
    budget: usize,
    phase1_steps: usize,
    norm_reduction_steps: usize,
    eliminations: usize,
    max_decomposition_size: usize,
    runtime_ms: u128,
}

#[derive(Clone, Copy, Debug)]
struct Trial {
    a: usize,
    b: usize,
    seed: u64,
}

/// Inclusive range `"a..b"` (or `"a..=b"`) or a single value `"a"`.
fn parse_range(flag: &str, text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--{flag}: expected \"a..b\" or \"a\", got {text:?}"));
    let number = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    match text.split_once("..") {
        Some((lo, hi)) => Ok((number(lo)?, number(hi.trim_start_matches('='))?)),
        None => {
            let v = number(text)?;
            Ok((v, v))
        }
    }
}

fn family_name(family: Family) -> &'static str {
    match family {
        Family::Cube => "cube",
        Family::Transportation => "transportation",
        Family::Network => "network",
        Family::Random => "random",
    }
}

fn repro(args: &BenchArgs, trial: Trial) -> String {
    format!(
        "circuitwalk bench --family {} --m-range {} --n-range {} --trials 1 --seed {} --mode {} --magnitude {}",
        family_name(args.family),
        trial.a,
        trial.b,
        trial.seed,
        if args.mode == crate::ModeArg::Any { "any" } else { "restricted" },
        args.magnitude
    )
}

fn run_trial(args: &BenchArgs, trial: Trial) -> Result<Row, CliError> {
    let fail = |error: CliError| CliError::Trial(Box::new(error), repro(args, trial));
    let (p, _) = spec(args.family, trial.a, trial.b, args.magnitude, trial.seed)?.build();
    let walk_mode = mode(args.mode);
    let target = random_vertex(&p, trial.seed).map_err(|e| fail(e.into()))?;
    let start = match walk_mode {
        WalkMode::AnyFeasibleStart => random_feasible_point(&p, trial.seed + 1),
        WalkMode::VertexToVertexRestricted => random_vertex(&p, trial.seed + 2).map(|v| v.point),
    }
    .map_err(|e| fail(e.into()))?;
    let started = Instant::now();
    let trace = run_walk(&p, &start, &target, walk_mode).map_err(|e| fail(e.into()))?;
    let runtime_ms = started.elapsed().as_millis();
    let certificate = verify_trace(&p, &trace);
    if !certificate.overall {
        return Err(fail(CliError::VerificationFailed(certificate.failed().join(", "))));
    }
    Ok(Row {
        family: family_name(args.family),
        m: p.m(),
        n: p.n(),
        seed: trial.seed,
        length: trace.len(),
        budget: trace.budget(),
        phase1_steps: trace.count(StepKind::Phase1),
        norm_reduction_steps: trace.count(StepKind::NormReduction),
        eliminations: trace.count(StepKind::Elimination),
        max_decomposition_size: trace.max_decomposition_size(),
        runtime_ms,
    })
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let (m_lo, m_hi) = parse_range("m-range", &args.m_range)?;
    let (n_lo, n_hi) = parse_range("n-range", &args.n_range)?;
    let mut trials = Vec::new();
    for a in m_lo..=m_hi {
        let bs: Vec<usize> = match args.family {
            Family::Cube => vec![0],
            Family::Random => (n_lo..=n_hi).filter(|&b| b > a).collect(),
            Family::Transportation | Family::Network => (n_lo..=n_hi).collect(),
        };
        for b in bs {
            trials.extend((0..args.trials).map(|t| Trial { a, b, seed: args.seed + t }));
        }
    }
    for trial in &trials {
        spec(args.family, trial.a, trial.b, args.magnitude, trial.seed)?;
    }
    let rows = trials.par_iter().map(|&trial| run_trial(args, trial)).collect::<Result<Vec<Row>, CliError>>()?;

    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    writer.write_record(HEADER.split(',')).expect("in-memory CSV");
    for row in &rows {
        writer.serialize(row).expect("in-memory CSV");
    }
    let bytes = writer.into_inner().expect("in-memory CSV");
    write_output(args.out.as_ref(), &String::from_utf8(bytes).expect("CSV is UTF-8"))
}
