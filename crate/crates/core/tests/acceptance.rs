//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use circuitwalk::circuits::{circuit_imbalance, conformal_decompose, DEFAULT_ENUMERATION_BUDGET};
use circuitwalk::format::{parse_trace, trace_to_string};
use circuitwalk::instances::{
    gen_cube, gen_elimination_state, gen_network_flow, gen_random_rational, gen_transportation, random_feasible_point,
    random_vertex,
};
use circuitwalk::linalg::{frac, int, Rational, RationalMatrix, RationalVector};
use circuitwalk::oracle::shortest_walk;
use circuitwalk::polyhedron::{PolyhedronInstance, VertexWithBasis};
use circuitwalk::verify::{sample_dual_objectives, verify_monotone, verify_trace};
use circuitwalk::walk::{run_walk, AlgorithmConstants, StepKind, WalkMode, WalkStep, WalkTrace, Walker};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

/// `⌈m·ln(8m⁴)⌉` from a table computed by hand: ln(128) = 4.85, ln(648) =
/// 6.47, ln(2048) = 7.62, ln(5000) = 8.52, ln(10368) = 9.25.
fn window(m: usize) -> usize {
    match m {
        2 => 10,
        3 => 20,
        4 => 31,
        5 => 43,
        6 => 56,
        _ => panic!("no table entry for m = {m}"),
    }
}

fn phase_two_bound(m: usize) -> usize {
    2 * m * (window(m) + 1)
}

struct Run {
    label: String,
    instance: PolyhedronInstance,
    start: RationalVector,
    start_vertex: RationalVector,
    target: VertexWithBasis,
    any: WalkTrace,
    restricted: WalkTrace,
}

/// One augmentation observed while driving a [`Walker`] by hand.
struct Observed {
    m: usize,
    kind: StepKind,
    before: RationalVector,
    after: RationalVector,
    reference: RationalVector,
    nonbasic: Vec<usize>,
    step: WalkStep,
}

fn make_run(label: String, instance: PolyhedronInstance, seed: u64) -> Result<Run, String> {
    let target = random_vertex(&instance, seed).map_err(|e| format!("{label}: target: {e}"))?;
    let start = random_feasible_point(&instance, seed + 101).map_err(|e| format!("{label}: start: {e}"))?;
    let start_vertex = random_vertex(&instance, seed + 202).map_err(|e| format!("{label}: start vertex: {e}"))?.point;
    let any = run_walk(&instance, &start, &target, WalkMode::AnyFeasibleStart).map_err(|e| format!("{label}: any-start walk: {e}"))?;
    let restricted = run_walk(&instance, &start_vertex, &target, WalkMode::VertexToVertexRestricted)
        .map_err(|e| format!("{label}: restricted walk: {e}"))?;
    Ok(Run { label, instance, start, start_vertex, target, any, restricted })
}

fn build_corpus() -> Result<Vec<Run>, String> {
    let mut runs = Vec::new();
    for d in 2..=6 {
        for seed in 0..4 {
            runs.push(make_run(format!("cube d={d} seed={seed}"), gen_cube(d), seed)?);
        }
    }
    for p in 2..=3 {
        for q in 2..=3 {
            for seed in 0..4 {
                runs.push(make_run(format!("transportation {p}x{q} seed={seed}"), gen_transportation(p, q, seed), seed)?);
            }
        }
    }
    for i in 0..210u64 {
        let m = 2 + (i % 3) as usize;
        let n = m + 1 + (i / 3) as usize % (14 - m);
        let magnitude = 1 + (i % 7) as i64;
        let (instance, _) = gen_random_rational(m, n, magnitude, i);
        runs.push(make_run(format!("random m={m} n={n} mag={magnitude} seed={i}"), instance, i)?);
    }
    Ok(runs)
}

fn observe(instance: &PolyhedronInstance, mut walker: Walker<'_>, out: &mut Vec<Observed>) -> Result<(), String> {
    loop {
        let before = walker.state().x.clone();
        let Some(step) = walker.next_step().map_err(|e| e.to_string())? else { break };
        let state = walker.state();
        out.push(Observed {
            m: instance.m(),
            kind: step.kind,
            before,
            after: state.x.clone(),
            reference: state.reference_point.clone(),
            nonbasic: state.nonbasic.clone(),
            step,
        });
    }
    ensure!(walker.state().x == walker.state().target.point, "walk ended away from the target");
    Ok(())
}

/// Steps of hand-driven walks on the corpus plus complete walks from the
/// generated elimination states, with the number of states used.
fn observations(corpus: &[Run]) -> Result<(Vec<Observed>, usize), String> {
    let mut out = Vec::new();
    for run in corpus {
        let walker = Walker::new(&run.instance, run.start.clone(), run.target.clone(), AlgorithmConstants::certified(run.instance.m()))
            .map_err(|e| format!("{}: {e}", run.label))?;
        observe(&run.instance, walker, &mut out).map_err(|e| format!("{}: {e}", run.label))?;
    }
    let mut states = 0;
    for seed in 0..400u64 {
        let m = 2 + (seed % 3) as usize;
        let n = m + 2 + (seed % 5) as usize;
        let Some(state) = gen_elimination_state(m, n, 1 + (seed % 6) as i64, seed) else { continue };
        states += 1;
        let walker = Walker::resume(&state.instance, state.point, state.reference, state.target, AlgorithmConstants::certified(m))
            .map_err(|e| format!("elimination state seed {seed}: {e}"))?;
        observe(&state.instance, walker, &mut out).map_err(|e| format!("elimination state seed {seed}: {e}"))?;
    }
    Ok((out, states))
}

fn nonbasic_support(x: &RationalVector, nonbasic: &[usize]) -> Vec<usize> {
    nonbasic.iter().copied().filter(|&j| !x[j].is_zero()).collect()
}

fn weighted_l1(x: &RationalVector, r: &RationalVector, nonbasic: &[usize]) -> Rational {
    nonbasic.iter().filter(|&&j| !x[j].is_zero()).map(|&j| x[j].abs() / &r[j]).sum()
}

/// `g ≠ 0`, `Ag = 0` and the support columns have nullity one.
fn elementary(a: &RationalMatrix, g: &RationalVector) -> bool {
    let support = g.support();
    !support.is_empty() && a.mul_vec(g).is_zero() && a.select_columns(&support).rank() + 1 == support.len()
}

fn criterion_1(corpus: &[Run]) -> Outcome {
    let mut worst = (0usize, 1usize);
    for run in corpus {
        let (m, n) = (run.instance.m(), run.instance.n());
        let budget = n + phase_two_bound(m);
        ensure!(run.any.len() <= budget, "{}: length {} > {budget}", run.label, run.any.len());
        let cert = verify_trace(&run.instance, &run.any);
        ensure!(cert.overall, "{}: verifier rejected the trace\n{cert}", run.label);
        if run.any.len() * worst.1 > worst.0 * budget {
            worst = (run.any.len(), budget);
        }
    }
    Ok(format!("{} runs, all certified; tightest length/budget {}/{}", corpus.len(), worst.0, worst.1))
}

fn criterion_2(corpus: &[Run]) -> Outcome {
    let mut longest = 0;
    for run in corpus {
        let m = run.instance.m();
        let budget = 2 * m + phase_two_bound(m);
        ensure!(run.restricted.len() <= budget, "{}: length {} > {budget}", run.label, run.restricted.len());
        ensure!(run.restricted.start == run.start_vertex, "{}: trace start differs", run.label);
        let cert = verify_trace(&run.instance, &run.restricted);
        ensure!(cert.overall, "{}: verifier rejected the restricted trace\n{cert}", run.label);
        longest = longest.max(run.restricted.len());
    }
    Ok(format!("{} restricted runs; longest {longest} steps", corpus.len()))
}

fn criterion_3(corpus: &[Run]) -> Outcome {
    let mut iterates = 0;
    for run in corpus {
        for trace in [&run.any, &run.restricted] {
            let m = int(run.instance.m() as i64);
            let target = &trace.target;
            let points = trace.iterates();
            let mut previous: Option<&Vec<usize>> = None;
            for (k, step) in trace.steps.iter().enumerate().filter(|(_, s)| s.kind.is_phase_two()) {
                for (set, x) in [(&step.trapped_before, &points[k]), (&step.trapped_after, &points[k + 1])] {
                    iterates += 1;
                    for &t in set.iter() {
                        ensure!(target.basis.contains(&t), "{}: step {k}: {t} ∉ B", run.label);
                        ensure!(x[t] <= &m * &target.point[t], "{}: step {k}: x_{t} = {} > m·x*_{t}", run.label, x[t]);
                    }
                    let recomputed: Vec<usize> =
                        target.basis.iter().copied().filter(|&t| x[t] <= &m * &target.point[t]).collect();
                    ensure!(*set == recomputed, "{}: step {k}: recorded T {set:?} ≠ {recomputed:?}", run.label);
                }
                if let Some(prev) = previous {
                    ensure!(prev.iter().all(|t| step.trapped_before.contains(t)), "{}: step {k}: T lost a member", run.label);
                }
                ensure!(
                    step.trapped_before.iter().all(|t| step.trapped_after.contains(t)),
                    "{}: step {k}: T lost a member",
                    run.label
                );
                previous = Some(&step.trapped_after);
            }
        }
    }
    Ok(format!("{iterates} trapped sets checked, zero violations"))
}

fn criterion_4(observed: &[Observed]) -> Outcome {
    let mut count = 0;
    for (i, o) in observed.iter().enumerate().filter(|(_, o)| o.kind == StepKind::NormReduction) {
        let m = int(o.m as i64);
        let alpha = &o.step.step_length;
        ensure!(*alpha >= Rational::one() && *alpha <= m, "observation {i}: α = {alpha} ∉ [1, m]");
        let before = weighted_l1(&o.before, &o.reference, &o.nonbasic);
        let after = weighted_l1(&o.after, &o.reference, &o.nonbasic);
        let factor = Rational::one() - m.recip();
        ensure!(after <= &factor * &before, "observation {i}: weighted norm {before} → {after}");
        count += 1;
    }
    ensure!(count > 0, "no norm-reduction steps observed");
    Ok(format!("{count} norm-reduction steps contract by (1 − 1/m) with α ∈ [1, m]"))
}

fn criterion_5(observed: &[Observed], states: usize) -> Outcome {
    let mut count = 0;
    for (i, o) in observed.iter().enumerate().filter(|(_, o)| o.kind == StepKind::Elimination) {
        let step = &o.step;
        ensure!(!step.trapped_before.contains(&step.blocking_index), "observation {i}: blocked at trapped index {}", step.blocking_index);
        let before = nonbasic_support(&o.before, &o.nonbasic);
        let after = nonbasic_support(&o.after, &o.nonbasic);
        let shrank = after.len() < before.len() && after.iter().all(|j| before.contains(j));
        let grew = step.trapped_after.len() > step.trapped_before.len()
            && step.trapped_before.iter().all(|t| step.trapped_after.contains(t));
        ensure!(shrank || grew, "observation {i}: no progress");
        count += 1;
    }
    ensure!(count > 0, "no elimination steps observed");
    Ok(format!("{count} elimination steps ({states} generated states), all blocked outside T with progress"))
}

fn criterion_6(corpus: &[Run]) -> Outcome {
    let mut objectives = 0;
    for (i, run) in corpus.iter().enumerate() {
        let trace = &run.restricted;
        ensure!(trace.count(StepKind::Phase1) == 0, "{}: restricted vertex walk has support-reduction steps", run.label);
        let points = trace.iterates();
        for dual in sample_dual_objectives(&run.instance, &run.target, 100, i as u64) {
            let report = verify_monotone(&run.instance, trace, &dual.c).map_err(|e| format!("{}: {e}", run.label))?;
            ensure!(report.check.passed(), "{}: {}", run.label, report.check.witness);
            let values: Vec<Rational> = points.iter().map(|x| x.iter().zip(dual.c.iter()).map(|(a, b)| a * b).sum()).collect();
            ensure!(values == report.values, "{}: reported values differ from direct evaluation", run.label);
            ensure!(values.windows(2).all(|w| w[1] <= w[0]), "{}: cᵀx increased", run.label);
            objectives += 1;
        }
    }
    Ok(format!("{objectives} dual-feasible objectives non-increasing along every restricted trace"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut vectors = 0;
    let mut tight = 0;
    while vectors < 520 {
        let m = rng.gen_range(2..=4);
        let n = rng.gen_range(m + 1..=9);
        let (p, _) = gen_random_rational(m, n, rng.gen_range(1..=5), rng.gen());
        let a = p.a();
        let kernel = a.kernel_basis();
        let mut x = RationalVector::zeros(n);
        for k in &kernel {
            if rng.gen_bool(0.7) {
                x = x.add_scaled(&frac(rng.gen_range(-4..=4), rng.gen_range(1..=3)), k);
            }
        }
        let d = conformal_decompose(a, &x).map_err(|e| e.to_string())?;
        let sum = d.terms.iter().fold(RationalVector::zeros(n), |acc, t| acc.add(t.direction()));
        ensure!(sum == x, "decomposition of {x} sums to {sum}");
        for t in &d.terms {
            let h = t.direction();
            ensure!(elementary(a, h), "term {h} is not elementary");
            let conformal = (0..n).all(|j| h[j].is_zero() || (h[j].signum() == x[j].signum() && h[j].abs() <= x[j].abs()));
            ensure!(conformal, "term {h} is not conformal to {x}");
        }
        let support = x.support();
        let kernel_dim = if support.is_empty() { 0 } else { support.len() - a.select_columns(&support).rank() };
        ensure!(d.terms.len() <= kernel_dim, "{} terms > dim ker A_supp = {kernel_dim}", d.terms.len());
        ensure!(d.terms.len() <= support.len(), "{} terms > |supp| = {}", d.terms.len(), support.len());
        if d.terms.len() == kernel_dim.min(support.len()) && kernel_dim > 1 {
            tight += 1;
        }
        vectors += 1;
    }
    Ok(format!("{vectors} kernel vectors decomposed exactly; {tight} meet the term bound with equality"))
}

fn criterion_8() -> Outcome {
    let mut cases: Vec<(String, PolyhedronInstance, RationalVector, VertexWithBasis)> = Vec::new();
    let cube = gen_cube(2);
    let target = cube.vertex_from_basis(&[1, 3]).map_err(|e| e.to_string())?;
    cases.push(("cube".into(), cube, RationalVector::from_i64(&[1, 0, 1, 0]), target));
    let mut seed = 0u64;
    while cases.len() < 6 {
        seed += 1;
        let m = 2 + (seed % 2) as usize;
        let (p, _) = gen_random_rational(m, 6.min(m + 3), 3, 1000 + seed);
        let (Ok(start), Ok(target)) = (random_vertex(&p, seed), random_vertex(&p, seed + 50)) else { continue };
        if start.point == target.point {
            continue;
        }
        cases.push((format!("random seed={}", 1000 + seed), p, start.point, target));
    }
    let mut lengths = Vec::new();
    for (label, p, start, target) in &cases {
        let trace = run_walk(p, start, target, WalkMode::AnyFeasibleStart).map_err(|e| format!("{label}: {e}"))?;
        ensure!(verify_trace(p, &trace).overall, "{label}: trace invalid");
        let oracle = shortest_walk(p, start, &target.point, 8, 200_000, DEFAULT_ENUMERATION_BUDGET).map_err(|e| format!("{label}: oracle: {e}"))?;
        ensure!(trace.len() >= oracle.len(), "{label}: walk of length {} beats the shortest {}", trace.len(), oracle.len());
        lengths.push(format!("{}≥{}", trace.len(), oracle.len()));
    }
    ensure!(lengths[0] == "2≥2", "cube: expected algorithm and oracle length 2, got {}", lengths[0]);
    Ok(format!("walk≥oracle lengths: {}", lengths.join(", ")))
}

fn criterion_9() -> Outcome {
    let kappa = |a: &RationalMatrix| circuit_imbalance(a, DEFAULT_ENUMERATION_BUDGET).map(|k| k.value).map_err(|e| e.to_string());
    let mut one = vec![];
    for d in 2..=4 {
        one.push((format!("cube d={d}"), gen_cube(d)));
    }
    for (p, q) in [(2, 2), (2, 3)] {
        one.push((format!("transportation {p}x{q}"), gen_transportation(p, q, 3)));
    }
    one.push(("network 4 nodes".into(), gen_network_flow(4, 3, 2)));
    one.push(("network 5 nodes".into(), gen_network_flow(5, 2, 9)));
    for (label, p) in &one {
        let value = kappa(p.a())?;
        ensure!(value == int(1), "{label}: κ = {value}");
    }
    let fixture = RationalMatrix::from_i64(&[[1, 2, 0], [0, 0, 1]]);
    let value = kappa(&fixture)?;
    ensure!(value == int(2), "fixture: κ = {value}");
    Ok(format!("κ = 1 on {} totally unimodular instances; κ = 2 on the fixture", one.len()))
}

fn expect_single_failure(label: &str, trace: &WalkTrace, check: &str) -> Result<(), String> {
    let cert = verify_trace(&trace.instance, trace);
    ensure!(!cert.overall && cert.failed() == vec![check], "{label}: expected only {check} to fail, got {:?}\n{cert}", cert.failed());
    Ok(())
}

fn criterion_10(corpus: &[Run]) -> Outcome {
    let cube = gen_cube(2);
    let target = cube.vertex_from_basis(&[1, 3]).map_err(|e| e.to_string())?;
    let start = RationalVector::from_i64(&[1, 0, 1, 0]);
    let honest = run_walk(&cube, &start, &target, WalkMode::AnyFeasibleStart).map_err(|e| e.to_string())?;
    ensure!(verify_trace(&cube, &honest).overall, "honest cube trace rejected");

    let mut wrong_alpha = honest.clone();
    wrong_alpha.steps[0].step_length /= int(2);
    expect_single_failure("wrong α", &wrong_alpha, "maximal")?;

    let mut non_elementary = honest.clone();
    non_elementary.steps[0].direction = RationalVector::from_i64(&[-1, 1, -1, 1]);
    expect_single_failure("non-elementary direction", &non_elementary, "elementary")?;

    let mut truncated = honest.clone();
    truncated.steps.pop();
    expect_single_failure("truncated trace", &truncated, "endpoint")?;

    let budget = honest.budget();
    ensure!(budget == 48, "cube budget {budget} ≠ 48");
    let forward = RationalVector::from_i64(&[-1, 1, 0, 0]);
    let pad = |direction: RationalVector, blocking_index| WalkStep {
        kind: StepKind::Phase1,
        direction,
        step_length: int(1),
        blocking_index,
        trapped_before: vec![],
        trapped_after: vec![],
        decomposition_size: 0,
        chosen_term: 0,
        elimination: None,
    };
    let mut padded = honest.clone();
    let mut prefix = Vec::new();
    for _ in 0..budget / 2 {
        prefix.push(pad(forward.clone(), 0));
        prefix.push(pad(forward.neg(), 1));
    }
    prefix.append(&mut padded.steps);
    padded.steps = prefix;
    ensure!(padded.len() > budget, "padding too short");
    expect_single_failure("budget violation", &padded, "length_budget")?;

    let mut forged_from = None;
    'search: for run in corpus {
        let m = int(run.instance.m() as i64);
        let points = run.any.iterates();
        for k in (0..run.any.len()).filter(|&k| run.any.steps[k].kind.is_phase_two()) {
            if let Some(&t) = run.target.basis.iter().find(|&&t| points[k][t] > &m * &run.target.point[t]) {
                forged_from = Some((run, k, t));
                break 'search;
            }
        }
    }
    let (run, k, t) = forged_from.ok_or("no corpus trace has an untrapped basic coordinate")?;
    let mut forged = run.any.clone();
    for step in forged.steps.iter_mut().skip(k) {
        for set in [&mut step.trapped_before, &mut step.trapped_after] {
            if !set.contains(&t) {
                set.push(t);
                set.sort_unstable();
            }
        }
    }
    ensure!(verify_trace(&run.instance, &run.any).overall, "{}: honest trace rejected", run.label);
    expect_single_failure("forged trapped set", &forged, "trapped_invariant")?;

    Ok(format!("5 corruptions each fail exactly their check (forged T on {} from step {k}, t = {t})", run.label))
}

fn criterion_11(corpus: &[Run]) -> Outcome {
    let mut traces = 0;
    for run in corpus {
        for trace in [&run.any, &run.restricted] {
            let text = trace_to_string(trace);
            let parsed = parse_trace(&text, &run.instance).map_err(|e| format!("{}: {e}", run.label))?;
            ensure!(trace_to_string(&parsed) == text, "{}: reserialization differs", run.label);
            let (a, b) = (verify_trace(&run.instance, trace), verify_trace(&run.instance, &parsed));
            ensure!(a.digest() == b.digest() && a.trace_hash == b.trace_hash, "{}: certificate digests differ", run.label);
            traces += 1;
        }
        let again = run_walk(&run.instance, &run.start, &run.target, WalkMode::AnyFeasibleStart).map_err(|e| e.to_string())?;
        ensure!(trace_to_string(&again) == trace_to_string(&run.any), "{}: rerun differs", run.label);
    }
    Ok(format!("{traces} traces reserialize byte-identically with identical certificate digests"))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let corpus = match build_corpus() {
        Ok(corpus) => corpus,
        Err(e) => {
            println!("acceptance corpus could not be built: {e}");
            return ExitCode::FAILURE;
        }
    };
    let random = corpus.iter().filter(|r| r.label.starts_with("random")).count();
    println!("corpus: {} runs ({random} random trials) built in {:.1?}", corpus.len(), started.elapsed());
    let observed = observations(&corpus);

    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "length budget", criterion_1(&corpus)),
        (2, "vertex-to-vertex budget", criterion_2(&corpus)),
        (3, "trapped invariant", criterion_3(&corpus)),
        (4, "contraction", observed.as_ref().map_err(Clone::clone).and_then(|(o, _)| criterion_4(o))),
        (5, "elimination progress", observed.as_ref().map_err(Clone::clone).and_then(|(o, s)| criterion_5(o, *s))),
        (6, "monotonicity", criterion_6(&corpus)),
        (7, "conformal decomposition", criterion_7()),
        (8, "oracle cross-check", criterion_8()),
        (9, "circuit imbalance", criterion_9()),
        (10, "verifier soundness", criterion_10(&corpus)),
        (11, "replay determinism", criterion_11(&corpus)),
    ];
    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed in {:.1?}", results.len() - failed, results.len(), started.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
