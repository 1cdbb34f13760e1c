//! Independent certification of walk traces.
//!
//! Every check is re-derived from `(A, b)` and the trace alone. Replay stops
//! at the first step that fails a step check; checks that need the rest of
//! the replay are then reported as skipped.

use std::fmt;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::format::trace_to_string;
use crate::linalg::{frac, int, Rational, RationalVector};
use crate::polyhedron::{PolyhedronInstance, VertexWithBasis};
use crate::walk::{AlgorithmConstants, StepKind, WalkStep, WalkTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIPPED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    /// Offending indices and values on failure, a summary otherwise.
    pub witness: String,
}

impl Check {
    fn new(name: &str, status: CheckStatus, witness: impl Into<String>) -> Self {
        Check { name: name.to_string(), status, witness: witness.into() }
    }

    fn pass(name: &str, witness: impl Into<String>) -> Self {
        Check::new(name, CheckStatus::Pass, witness)
    }

    fn fail(name: &str, witness: impl Into<String>) -> Self {
        Check::new(name, CheckStatus::Fail, witness)
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    /// SHA-256 of the canonical trace serialization, hex encoded.
    pub trace_hash: String,
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl Certificate {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail).map(|c| c.name.as_str()).collect()
    }

    /// SHA-256 of the text report, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_string().as_bytes()))
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trace_hash {}", self.trace_hash)?;
        for check in &self.checks {
            writeln!(f, "{:<8} {:<22} {}", check.status.as_str(), check.name, check.witness)?;
        }
        writeln!(f, "overall {}", if self.overall { "PASS" } else { "FAIL" })
    }
}

pub const STEP_CHECKS: [&str; 4] = ["elementary", "positive_step", "feasible", "maximal"];

/// `g ≠ 0`, `Ag = 0` and `rank(A_supp(g)) = |supp(g)| − 1`.
fn is_elementary(p: &PolyhedronInstance, g: &RationalVector) -> std::result::Result<(), String> {
    if g.len() != p.n() {
        return Err(format!("direction has {} entries, expected {}", g.len(), p.n()));
    }
    let support = g.support();
    if support.is_empty() {
        return Err("direction is zero".into());
    }
    let residual = p.a().mul_vec(g);
    if let Some(i) = residual.iter().position(|r| !r.is_zero()) {
        return Err(format!("(Ag)_{i} = {} ≠ 0", residual[i]));
    }
    let rank = p.a().rank_of_columns(&support);
    if rank + 1 != support.len() {
        return Err(format!("support {support:?} has nullity {}", support.len() - rank));
    }
    Ok(())
}

fn feasibility_witness(p: &PolyhedronInstance, x: &RationalVector) -> Option<String> {
    if x.len() != p.n() {
        return Some(format!("point has {} entries, expected {}", x.len(), p.n()));
    }
    if let Some(j) = x.iter().position(Signed::is_negative) {
        return Some(format!("x_{j} = {} < 0", x[j]));
    }
    let ax = p.a().mul_vec(x);
    (0..p.m()).find(|&i| ax[i] != p.b()[i]).map(|i| format!("(Ax)_{i} = {} ≠ b_{i} = {}", ax[i], p.b()[i]))
}

/// The four step checks: elementary direction, positive step, feasible
/// successor and a blocking coordinate certifying maximality.
pub fn verify_step(p: &PolyhedronInstance, x_before: &RationalVector, step: &WalkStep) -> Vec<Check> {
    let g = &step.direction;
    let alpha = &step.step_length;
    let elementary = match is_elementary(p, g) {
        Ok(()) => Check::pass("elementary", format!("support {:?}", g.support())),
        Err(w) => Check::fail("elementary", w),
    };
    let positive = if alpha.is_positive() {
        Check::pass("positive_step", format!("α = {alpha}"))
    } else {
        Check::fail("positive_step", format!("α = {alpha} ≤ 0"))
    };
    if g.len() != x_before.len() {
        return vec![
            elementary,
            positive,
            Check::fail("feasible", "direction length mismatch"),
            Check::fail("maximal", "direction length mismatch"),
        ];
    }
    let next = x_before.add_scaled(alpha, g);
    let feasible = match feasibility_witness(p, &next) {
        None => Check::pass("feasible", ""),
        Some(w) => Check::fail("feasible", w),
    };
    let blocking: Vec<usize> = (0..g.len()).filter(|&j| g[j].is_negative() && next[j].is_zero()).collect();
    let maximal = if blocking.is_empty() {
        let slack = (0..g.len())
            .filter(|&j| g[j].is_negative())
            .map(|j| format!("x_{j} = {}", next[j]))
            .collect::<Vec<_>>()
            .join(", ");
        Check::fail("maximal", format!("no coordinate with g_j < 0 reaches 0 ({slack})"))
    } else if !blocking.contains(&step.blocking_index) {
        Check::fail("maximal", format!("recorded blocking index {} is not blocking; {blocking:?} are", step.blocking_index))
    } else {
        Check::pass("maximal", format!("blocked at {}", step.blocking_index))
    };
    vec![elementary, positive, feasible, maximal]
}

/// Accumulates the first failure of one trace-level check.
struct Tracker {
    name: &'static str,
    failure: Option<String>,
    summary: String,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Tracker { name, failure: None, summary: String::new() }
    }

    fn fail(&mut self, witness: String) {
        if self.failure.is_none() {
            self.failure = Some(witness);
        }
    }

    fn finish(self, complete: bool) -> Check {
        match self.failure {
            Some(w) => Check::fail(self.name, w),
            None if complete => Check::pass(self.name, self.summary),
            None => Check::new(self.name, CheckStatus::Skipped, "replay halted"),
        }
    }
}

fn format_set(set: &[usize]) -> String {
    format!("{set:?}")
}

/// Certifies a trace against `p`.
pub fn verify_trace(p: &PolyhedronInstance, trace: &WalkTrace) -> Certificate {
    let mut checks = Vec::new();
    let n = p.n();
    let m = p.m();
    let mm = int(m as i64);

    checks.push(if trace.instance == *p {
        Check::pass("instance", format!("{m} × {n}"))
    } else {
        Check::fail("instance", "trace was recorded on a different instance")
    });
    let certified = AlgorithmConstants::certified(m);
    checks.push(
        if trace.constants.m == m && trace.constants.tau == certified.tau && trace.constants.lambda == certified.lambda {
            Check::pass("constants", format!("τ = {}, λ = {}", certified.tau, certified.lambda))
        } else {
            Check::fail(
                "constants",
                format!("τ = {}, λ = {} for m = {}; certified values are τ = {}, λ = {}", trace.constants.tau, trace.constants.lambda, trace.constants.m, certified.tau, certified.lambda),
            )
        },
    );
    let start_ok = feasibility_witness(p, &trace.start);
    checks.push(match &start_ok {
        None => Check::pass("start_feasible", ""),
        Some(w) => Check::fail("start_feasible", w.clone()),
    });
    let target = &trace.target;
    let target_ok = target_witness(p, target);
    checks.push(match &target_ok {
        None => Check::pass("target_vertex", format!("basis {:?}", target.basis)),
        Some(w) => Check::fail("target_vertex", w.clone()),
    });

    let budget = trace.mode.budget(n, m);
    checks.push(if trace.len() <= budget {
        Check::pass("length_budget", format!("{} ≤ {budget}", trace.len()))
    } else {
        Check::fail("length_budget", format!("{} > {budget}", trace.len()))
    });

    let mut step_trackers: Vec<Tracker> = STEP_CHECKS.iter().map(|&name| Tracker::new(name)).collect();
    let mut phase_order = Tracker::new("phase_order");
    let mut direction_sign = Tracker::new("phase2_direction_sign");
    let mut trapped_invariant = Tracker::new("trapped_invariant");
    let mut trapped_monotone = Tracker::new("trapped_monotone");
    let mut support_monotone = Tracker::new("support_monotone");
    let mut endpoint = Tracker::new("endpoint");

    let mut complete = start_ok.is_none() && target_ok.is_none();
    if complete {
        let basis = &target.basis;
        let nonbasic = target.nonbasic(n);
        let nonbasic_support = |x: &RationalVector| -> Vec<usize> {
            nonbasic.iter().copied().filter(|&j| !x[j].is_zero()).collect()
        };
        let check_trapped = |set: &[usize], x: &RationalVector, k: usize, at: &str| -> Option<String> {
            for &t in set {
                if !basis.contains(&t) {
                    return Some(format!("step {k}: {at} T contains non-basic index {t}"));
                }
                if x[t] > &mm * &target.point[t] {
                    return Some(format!(
                        "step {k}: {at} t = {t}, x_t = {}, x*_t = {}, m·x*_t = {}",
                        x[t],
                        target.point[t],
                        &mm * &target.point[t]
                    ));
                }
            }
            None
        };

        let mut x = trace.start.clone();
        let mut seen_phase_two = false;
        let mut previous_trapped: Option<&[usize]> = None;
        let mut main_support: Option<Vec<usize>> = None;
        for (k, step) in trace.steps.iter().enumerate() {
            let results = verify_step(p, &x, step);
            let mut step_failed = false;
            for (tracker, result) in step_trackers.iter_mut().zip(&results) {
                if !result.passed() {
                    tracker.fail(format!("step {k}: {}", result.witness));
                    step_failed = true;
                }
            }
            if step_failed {
                complete = false;
                break;
            }
            let next = x.add_scaled(&step.step_length, &step.direction);

            if step.kind.is_phase_two() {
                seen_phase_two = true;
                if let Some(&j) = nonbasic.iter().find(|&&j| step.direction[j].is_positive()) {
                    direction_sign.fail(format!("step {k}: g_{j} = {} > 0 with {j} ∈ N", step.direction[j]));
                }
                if let Some(w) = check_trapped(&step.trapped_before, &x, k, "before:") {
                    trapped_invariant.fail(w);
                }
                if let Some(w) = check_trapped(&step.trapped_after, &next, k, "after:") {
                    trapped_invariant.fail(w);
                }
                if let Some(prev) = previous_trapped {
                    if let Some(t) = prev.iter().find(|t| !step.trapped_before.contains(t)) {
                        trapped_monotone.fail(format!("step {k}: T lost index {t}"));
                    }
                }
                if let Some(t) = step.trapped_before.iter().find(|t| !step.trapped_after.contains(t)) {
                    trapped_monotone.fail(format!("step {k}: T lost index {t}"));
                }
                previous_trapped = Some(&step.trapped_after);

                let before = main_support.take().unwrap_or_else(|| nonbasic_support(&x));
                let after = nonbasic_support(&next);
                if let Some(j) = after.iter().find(|j| !before.contains(j)) {
                    support_monotone.fail(format!("step {k}: x_{j} became positive in the main phase"));
                }
                main_support = Some(after);
            } else if seen_phase_two {
                phase_order.fail(format!("step {k}: support-reduction step after the main phase began"));
            }
            x = next;
        }
        if complete && x != target.point {
            endpoint.fail(format!("final point {x} ≠ target {}", target.point));
        }
        let phase_two = trace.steps.iter().filter(|s| s.kind.is_phase_two()).count();
        phase_order.summary = format!("{} support-reduction, {phase_two} main-phase steps", trace.len() - phase_two);
        endpoint.summary = format!("{}", target.point);
        trapped_monotone.summary = format!(
            "final T = {}",
            format_set(trace.steps.iter().rev().find(|s| s.kind.is_phase_two()).map_or(&[][..], |s| &s.trapped_after[..]))
        );
    }
    for tracker in step_trackers {
        checks.push(tracker.finish(complete));
    }
    for tracker in [phase_order, direction_sign, trapped_invariant, trapped_monotone, support_monotone, endpoint] {
        checks.push(tracker.finish(complete));
    }
    let overall = checks.iter().all(Check::passed);
    Certificate { trace_hash: hex::encode(Sha256::digest(trace_to_string(trace).as_bytes())), checks, overall }
}

fn target_witness(p: &PolyhedronInstance, target: &VertexWithBasis) -> Option<String> {
    if target.point.len() != p.n() {
        return Some(format!("target has {} entries, expected {}", target.point.len(), p.n()));
    }
    if target.basis.len() != p.m() || target.basis.iter().any(|&j| j >= p.n()) {
        return Some(format!("basis {:?} is not a set of {} columns", target.basis, p.m()));
    }
    if p.a().rank_of_columns(&target.basis) != p.m() {
        return Some(format!("basis {:?} is singular", target.basis));
    }
    if let Some(j) = target.nonbasic(p.n()).into_iter().find(|&j| !target.point[j].is_zero()) {
        return Some(format!("target is nonzero at non-basic index {j}"));
    }
    feasibility_witness(p, &target.point)
}

/// `c = Aᵀy + s` with `s_B = 0` and `s_N ≥ 0`, which makes the target
/// optimal for `min cᵀx`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualObjective {
    pub c: RationalVector,
    pub y: RationalVector,
    pub s: RationalVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneReport {
    pub dual: DualObjective,
    /// `cᵀx` at every iterate of the trace.
    pub values: Vec<Rational>,
    pub check: Check,
}

/// Recovers the dual certificate of `c` for the basis `B`: `y` solves
/// `A_Bᵀ y = c_B` and `s = c − Aᵀy` must be nonnegative.
pub fn dual_certificate(p: &PolyhedronInstance, basis: &[usize], c: &RationalVector) -> Result<DualObjective> {
    if c.len() != p.n() {
        return Err(Error::Dimension(format!("objective has {} entries, expected {}", c.len(), p.n())));
    }
    let a_b_t = p.a().select_columns(basis).transpose();
    let y = a_b_t
        .solve(&c.select(basis))
        .map_err(|_| Error::NotDualFeasible(format!("A_Bᵀy = c_B has no solution for B = {basis:?}")))?;
    let s = c.sub(&p.a().transpose_mul_vec(&y));
    if let Some(j) = (0..p.n()).find(|&j| s[j].is_negative()) {
        return Err(Error::NotDualFeasible(format!("s_{j} = {} < 0", s[j])));
    }
    Ok(DualObjective { c: c.clone(), y, s })
}

/// Checks that `cᵀx` never increases along the main-phase steps of the
/// trace, or along all of it when there is no support-reduction step.
pub fn verify_monotone(p: &PolyhedronInstance, trace: &WalkTrace, c: &RationalVector) -> Result<MonotoneReport> {
    let dual = dual_certificate(p, &trace.target.basis, c)?;
    let iterates = trace.iterates();
    let values: Vec<Rational> = iterates.iter().map(|x| c.dot(x)).collect();
    let full = trace.count(StepKind::Phase1) == 0;
    let violation = trace
        .steps
        .iter()
        .enumerate()
        .filter(|(_, step)| full || step.kind.is_phase_two())
        .find(|&(k, _)| values[k + 1] > values[k]);
    let scope = if full { "all steps" } else { "main-phase steps" };
    let check = match violation {
        Some((k, _)) => Check::fail("monotone", format!("step {k}: cᵀx rose from {} to {}", values[k], values[k + 1])),
        None => Check::pass(
            "monotone",
            format!("{scope}: {}", values.iter().map(ToString::to_string).collect::<Vec<_>>().join(" → ")),
        ),
    };
    Ok(MonotoneReport { dual, values, check })
}

/// Seeded objectives minimized at `target`: random `y` and random `s_N ≥ 0`.
pub fn sample_dual_objectives(
    p: &PolyhedronInstance,
    target: &VertexWithBasis,
    count: usize,
    seed: u64,
) -> Vec<DualObjective> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nonbasic = target.nonbasic(p.n());
    (0..count)
        .map(|_| {
            let y: RationalVector = (0..p.m()).map(|_| frac(rng.gen_range(-6..=6), rng.gen_range(1..=6))).collect();
            let s: RationalVector = (0..p.n())
                .map(|j| {
                    if nonbasic.contains(&j) {
                        frac(rng.gen_range(0..=6), rng.gen_range(1..=6))
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            let c = p.a().transpose_mul_vec(&y).add(&s);
            DualObjective { c, y, s }
        })
        .collect()
}
