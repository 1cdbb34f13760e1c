use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use circuitwalk::circuits::{circuit_imbalance, enumerate_circuits, DEFAULT_ENUMERATION_BUDGET};
use circuitwalk::format::{parse_trace, trace_to_string, InstanceFile};
use circuitwalk::instances::{random_feasible_point, random_vertex, GeneratorSpec};
use circuitwalk::linalg::{parse_rational, RationalVector};
use circuitwalk::oracle::shortest_walk;
use circuitwalk::polyhedron::PolyhedronInstance;
use circuitwalk::verify::{verify_monotone, verify_trace};
use circuitwalk::walk::{run_walk_with, AlgorithmConstants, StepKind, WalkMode};
use circuitwalk::Error;

use crate::exit::CliError;
use crate::{EnumerationArgs, Family, GenArgs, ModeArg, OracleArgs, VerifyArgs, WalkArgs};

pub const BUDGET_VAR: &str = "CIRCUITWALK_ENUM_BUDGET";

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Writes to `path`, or to stdout when it is `None`.
pub fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e)),
    }
}

fn load(path: &Path) -> Result<(InstanceFile, PolyhedronInstance), CliError> {
    let file = InstanceFile::parse(&read_text(path)?)?;
    let instance = file.instance()?;
    Ok((file, instance))
}

fn vector(flag: &str, text: &str) -> Result<RationalVector, CliError> {
    RationalVector::parse_list(text).map_err(|e| CliError::Library(Error::Parse(format!("--{flag}: {e}"))))
}

fn indices(flag: &str, text: &str) -> Result<Vec<usize>, CliError> {
    text.trim_matches(|c| matches!(c, '(' | ')' | '[' | ']'))
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| CliError::Library(Error::Parse(format!("--{flag}: {e}")))))
        .collect()
}

pub fn mode(arg: ModeArg) -> WalkMode {
    match arg {
        ModeArg::Any => WalkMode::AnyFeasibleStart,
        ModeArg::Restricted => WalkMode::VertexToVertexRestricted,
    }
}

/// `--budget`, else `$CIRCUITWALK_ENUM_BUDGET`, else the library default.
fn enumeration_budget(flag: Option<u128>) -> Result<u128, CliError> {
    if let Some(budget) = flag {
        return Ok(budget);
    }
    match std::env::var(BUDGET_VAR) {
        Ok(text) => text.trim().parse().map_err(|_| CliError::Usage(format!("{BUDGET_VAR}={text:?} is not a count"))),
        Err(_) => Ok(DEFAULT_ENUMERATION_BUDGET),
    }
}

pub fn walk(args: &WalkArgs) -> Result<(), CliError> {
    let (mut file, p) = load(&args.instance)?;
    let walk_mode = mode(args.mode);
    let constants = if args.tau.is_some() || args.lambda.is_some() {
        let defaults = AlgorithmConstants::certified(p.m());
        let tau = args.tau.as_deref().map(parse_rational).transpose()?.unwrap_or(defaults.tau);
        let lambda = args.lambda.as_deref().map(parse_rational).transpose()?.unwrap_or(defaults.lambda);
        AlgorithmConstants::experimental(p.m(), tau, lambda)?
    } else {
        AlgorithmConstants::certified(p.m())
    };

    if args.target.is_some() || args.target_basis.is_some() {
        file.target_vertex = args.target.as_deref().map(|t| vector("target", t)).transpose()?;
        file.target_basis = args.target_basis.as_deref().map(|t| indices("target-basis", t)).transpose()?;
    }
    let explicit = file.target(&p)?;
    let objective = match (&args.objective, &explicit) {
        (Some(text), _) => Some(vector("objective", text)?),
        (None, None) => file.objective.clone(),
        (None, Some(_)) => None,
    };
    let target = match (objective.as_ref(), explicit) {
        (Some(c), _) => {
            if c.len() != p.n() {
                return Err(Error::Dimension(format!("objective has {} entries, expected {}", c.len(), p.n())).into());
            }
            p.solve_lp(c)?
        }
        (None, Some(target)) => target,
        (None, None) => {
            return Err(CliError::Usage(
                "no target: pass --target, --target-basis or --objective, or set them in the instance file".into(),
            ))
        }
    };

    let start = match (&args.start, &file.start, args.seed) {
        (Some(text), _, _) => vector("start", text)?,
        (None, Some(start), _) => start.clone(),
        (None, None, Some(seed)) => match walk_mode {
            WalkMode::AnyFeasibleStart => random_feasible_point(&p, seed)?,
            WalkMode::VertexToVertexRestricted => random_vertex(&p, seed)?.point,
        },
        (None, None, None) => p.find_feasible_point()?,
    };
    if start.len() != p.n() {
        return Err(Error::Dimension(format!("start has {} entries, expected {}", start.len(), p.n())).into());
    }

    let mut trace = run_walk_with(&p, &start, &target, walk_mode, constants)?;
    trace.objective = objective;
    write_output(args.out.as_ref(), &trace_to_string(&trace))?;
    eprintln!(
        "length {} (budget {}): {} support-reduction, {} norm-reduction, {} elimination steps{}",
        trace.len(),
        trace.budget(),
        trace.count(StepKind::Phase1),
        trace.count(StepKind::NormReduction),
        trace.count(StepKind::Elimination),
        if trace.constants.certified { "" } else { " [uncertified constants]" }
    );
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let (_, p) = load(&args.instance)?;
    let trace = parse_trace(&read_text(&args.trace)?, &p)?;
    let certificate = verify_trace(&p, &trace);
    let mut report = certificate.to_string();
    let mut monotone_ok = true;
    if let Some(text) = &args.objective {
        let c = vector("objective", text)?;
        let monotone = verify_monotone(&p, &trace, &c)?;
        monotone_ok = monotone.check.passed();
        report.push_str(&format!("monotone {} {}\n", monotone.check.status.as_str(), monotone.check.witness));
    }
    report.push_str(&format!("certificate_digest {}\n", certificate.digest()));
    write_output(None, &report)?;
    if !certificate.overall {
        return Err(CliError::VerificationFailed(certificate.failed().join(", ")));
    }
    if !monotone_ok {
        return Err(CliError::VerificationFailed("monotone".into()));
    }
    Ok(())
}

pub fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let (file, p) = load(&args.instance)?;
    let start = match (&args.start, &file.start) {
        (Some(text), _) => vector("start", text)?,
        (None, Some(start)) => start.clone(),
        (None, None) => return Err(CliError::Usage("no start: pass --start or set \"start\"".into())),
    };
    let target = match (&args.target, &file.target_vertex) {
        (Some(text), _) => vector("target", text)?,
        (None, Some(target)) => target.clone(),
        (None, None) => return Err(CliError::Usage("no target: pass --target or set \"target_vertex\"".into())),
    };
    let budget = enumeration_budget(args.budget)?;
    let walk = shortest_walk(&p, &start, &target, args.depth, args.nodes, budget)?;
    let mut text = format!("length {}\n", walk.len());
    for point in walk.points() {
        text.push_str(&format!("{point}\n"));
    }
    write_output(None, &text)
}

pub fn circuits(args: &EnumerationArgs) -> Result<(), CliError> {
    let (_, p) = load(&args.instance)?;
    let circuits = enumerate_circuits(p.a(), enumeration_budget(args.budget)?)?;
    let mut text = format!("{} circuits\n", circuits.len());
    for g in &circuits {
        text.push_str(&format!("{}\n", g.direction()));
    }
    write_output(None, &text)
}

pub fn kappa(args: &EnumerationArgs) -> Result<(), CliError> {
    let (_, p) = load(&args.instance)?;
    let value = circuit_imbalance(p.a(), enumeration_budget(args.budget)?)?.value;
    write_output(None, &format!("{value}\n"))
}

pub fn spec(family: Family, a: usize, b: usize, magnitude: i64, seed: u64) -> Result<GeneratorSpec, CliError> {
    let spec = match family {
        Family::Cube => GeneratorSpec::Cube { d: a },
        Family::Transportation => GeneratorSpec::Transportation { p: a, q: b, seed },
        Family::Network => GeneratorSpec::NetworkFlow { nodes: a + 1, extra_arcs: b, seed },
        Family::Random => GeneratorSpec::RandomRational { m: a, n: b, magnitude, seed },
    };
    let valid = match spec {
        GeneratorSpec::Cube { d } => d >= 2,
        GeneratorSpec::Transportation { p, q, .. } => p >= 2 && q >= 2,
        GeneratorSpec::NetworkFlow { nodes, .. } => nodes >= 3,
        GeneratorSpec::RandomRational { m, n, magnitude, .. } => 2 <= m && m < n && magnitude >= 1,
    };
    if !valid {
        return Err(CliError::Usage(format!("invalid generator parameters {spec:?}")));
    }
    Ok(spec)
}

pub fn generate(args: &GenArgs) -> Result<(), CliError> {
    let (p, vertex) = spec(args.family, args.m, args.n, args.magnitude, args.seed)?.build();
    let mut file = InstanceFile::from_instance(&p);
    if let Some(vertex) = vertex {
        file.target_vertex = Some(vertex.point);
        file.target_basis = Some(vertex.basis);
    }
    write_output(args.out.as_ref(), &file.to_json())
}
