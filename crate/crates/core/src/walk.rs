//! The two-phase circuit augmentation walk.
//!
//! Phase 1 zeroes non-basic coordinates until at most `m` remain. Phase 2
//! maintains the trapped set `T = {t ∈ B : x_t ≤ m·x*_t}` and alternates
//! norm-reduction steps (best weighted ℓ1 progress on `N` among the terms
//! of a conformal decomposition of `x* − x`) with elimination steps (a
//! circuit of the decomposition of `z − x`, where `z` extrapolates past
//! zero on `N` and is pulled toward `x*`). Every bound the analysis relies
//! on is asserted while walking and surfaces as
//! [`Error::InternalInvariantViolation`].

use num_traits::{One, Signed, Zero};

use crate::circuits::{certify_elementary, conformal_decompose, extract_elementary};
use crate::error::{invariant, Error, Result};
use crate::linalg::{int, Rational, RationalVector};
use crate::polyhedron::{PolyhedronInstance, VertexWithBasis};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgorithmConstants {
    pub m: usize,
    pub tau: Rational,
    pub lambda: Rational,
    /// False when `tau`/`lambda` were overridden.
    pub certified: bool,
}

impl AlgorithmConstants {
    /// `τ = (2m)⁻³`, `λ = (2m)⁻²`.
    pub fn certified(m: usize) -> Self {
        let two_m = int(2 * m as i64);
        AlgorithmConstants {
            m,
            tau: (&two_m * &two_m * &two_m).recip(),
            lambda: (&two_m * &two_m).recip(),
            certified: true,
        }
    }

    /// Overridden constants for experiments; the resulting traces are
    /// marked uncertified unless the values happen to equal the defaults.
    pub fn experimental(m: usize, tau: Rational, lambda: Rational) -> Result<Self> {
        if !tau.is_positive() || tau >= Rational::one() {
            return Err(Error::Parse(format!("tau must lie in (0, 1), got {tau}")));
        }
        if lambda.is_negative() || lambda > Rational::one() {
            return Err(Error::Parse(format!("lambda must lie in [0, 1], got {lambda}")));
        }
        let defaults = Self::certified(m);
        let certified = tau == defaults.tau && lambda == defaults.lambda;
        Ok(AlgorithmConstants { m, tau, lambda, certified })
    }
}

/// `⌈m·ln(m/τ)⌉ = ⌈m·ln(8m⁴)⌉`: the most consecutive norm-reduction steps
/// a reference window can hold.
pub fn norm_reduction_window(m: usize) -> usize {
    let m = m as f64;
    (m * (8.0 * m.powi(4)).ln()).ceil() as usize
}

/// `2m·(⌈m·ln(8m⁴)⌉ + 1)`
pub fn phase_two_budget(m: usize) -> usize {
    2 * m * (norm_reduction_window(m) + 1)
}

/// `n + 2m·(⌈m·ln(8m⁴)⌉ + 1)`
pub fn length_budget(n: usize, m: usize) -> usize {
    n + phase_two_budget(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WalkMode {
    AnyFeasibleStart,
    /// Walk between vertices on the columns `supp(u) ∪ supp(v) ∪ B`.
    VertexToVertexRestricted,
}

impl WalkMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WalkMode::AnyFeasibleStart => "any",
            WalkMode::VertexToVertexRestricted => "restricted",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "any" => Ok(WalkMode::AnyFeasibleStart),
            "restricted" => Ok(WalkMode::VertexToVertexRestricted),
            other => Err(Error::Parse(format!("unknown walk mode {other:?}"))),
        }
    }

    /// Length budget for a trace in this mode on an `m × n` instance.
    pub fn budget(self, n: usize, m: usize) -> usize {
        match self {
            WalkMode::AnyFeasibleStart => length_budget(n, m),
            WalkMode::VertexToVertexRestricted => length_budget(n.min(2 * m), m),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepKind {
    Phase1,
    NormReduction,
    Elimination,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Phase1 => "phase1",
            StepKind::NormReduction => "norm_reduction",
            StepKind::Elimination => "elimination",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "phase1" => Ok(StepKind::Phase1),
            "norm_reduction" => Ok(StepKind::NormReduction),
            "elimination" => Ok(StepKind::Elimination),
            other => Err(Error::Parse(format!("unknown step kind {other:?}"))),
        }
    }

    pub fn is_phase_two(self) -> bool {
        self != StepKind::Phase1
    }
}

/// The auxiliary points of an elimination step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationData {
    pub q: usize,
    pub rho: Rational,
    pub y: RationalVector,
    pub z: RationalVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkStep {
    pub kind: StepKind,
    pub direction: RationalVector,
    pub step_length: Rational,
    pub blocking_index: usize,
    /// `T` at the iterate the step leaves from (empty in Phase 1).
    pub trapped_before: Vec<usize>,
    /// `{t ∈ B : x_t ≤ m·x*_t}` at the iterate the step arrives at (empty in
    /// Phase 1).
    pub trapped_after: Vec<usize>,
    /// Number of terms `k` in the decomposition (0 in Phase 1).
    pub decomposition_size: usize,
    /// Index of the chosen term (0 in Phase 1).
    pub chosen_term: usize,
    pub elimination: Option<EliminationData>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkTrace {
    pub instance: PolyhedronInstance,
    pub start: RationalVector,
    pub target: VertexWithBasis,
    pub steps: Vec<WalkStep>,
    pub constants: AlgorithmConstants,
    pub mode: WalkMode,
    pub objective: Option<RationalVector>,
}

impl WalkTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn budget(&self) -> usize {
        self.mode.budget(self.instance.n(), self.instance.m())
    }

    /// `start` followed by every iterate, recomputed from the steps.
    pub fn iterates(&self) -> Vec<RationalVector> {
        let mut points = vec![self.start.clone()];
        for step in &self.steps {
            let last = points.last().expect("nonempty");
            points.push(last.add_scaled(&step.step_length, &step.direction));
        }
        points
    }

    pub fn count(&self, kind: StepKind) -> usize {
        self.steps.iter().filter(|s| s.kind == kind).count()
    }

    pub fn max_decomposition_size(&self) -> usize {
        self.steps.iter().map(|s| s.decomposition_size).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    SupportReduction,
    Main,
    Done,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgorithmState {
    pub x: RationalVector,
    pub iteration: usize,
    pub phase: Phase,
    pub trapped: Vec<usize>,
    pub reference_index: usize,
    pub reference_point: RationalVector,
    pub target: VertexWithBasis,
    pub nonbasic: Vec<usize>,
    /// `T` has been computed at least once (`T⁽⁻¹⁾ = ∅` before).
    trapped_initialized: bool,
    window_norm_steps: usize,
    phase_one_steps: usize,
    phase_two_steps: usize,
}

impl AlgorithmState {
    pub fn new(p: &PolyhedronInstance, start: RationalVector, target: VertexWithBasis) -> Result<Self> {
        if !p.is_feasible(&start) {
            return Err(Error::StartInfeasible);
        }
        target.validate(p)?;
        let nonbasic = target.nonbasic(p.n());
        Ok(AlgorithmState {
            reference_point: start.clone(),
            x: start,
            iteration: 0,
            phase: Phase::SupportReduction,
            trapped: Vec::new(),
            reference_index: 0,
            target,
            nonbasic,
            trapped_initialized: false,
            window_norm_steps: 0,
            phase_one_steps: 0,
            phase_two_steps: 0,
        })
    }

    /// `supp(x_N)`
    pub fn nonbasic_support(&self) -> Vec<usize> {
        self.nonbasic.iter().copied().filter(|&j| !self.x[j].is_zero()).collect()
    }

    fn trapped_at(&self, m: usize, x: &RationalVector) -> Vec<usize> {
        let m = int(m as i64);
        self.target
            .basis
            .iter()
            .copied()
            .filter(|&t| x[t] <= &m * &self.target.point[t])
            .collect()
    }

    /// `‖x_N / x⁽ʳ⁾_N‖_∞` with `0/0 = 0`.
    pub fn reference_ratio(&self) -> Result<Rational> {
        self.nonbasic
            .iter()
            .map(|&j| quotient(&self.x[j], &self.reference_point[j]))
            .try_fold(Rational::zero(), |acc, r| Ok(acc.max(r?)))
    }
}

/// `a / b` with `0/0 = 0`.
fn quotient(a: &Rational, b: &Rational) -> Result<Rational> {
    if b.is_zero() {
        if a.is_zero() {
            return Ok(Rational::zero());
        }
        return Err(invariant(format!("ratio {a}/0 against the reference point")));
    }
    Ok(a / b)
}

/// `‖v_N / w_N‖₁` with `0/0 = 0`.
fn weighted_l1(v: &RationalVector, w: &RationalVector, indices: &[usize]) -> Result<Rational> {
    indices
        .iter()
        .map(|&j| quotient(&v[j].abs(), &w[j]))
        .try_fold(Rational::zero(), |acc, r| Ok(acc + r?))
}

/// `q`, `ρ`, `y = x + ρ/(1−ρ)·(x − x⁽ʳ⁾)` and `z = y + λ(x* − y)`.
pub fn compute_elimination_target(
    x: &RationalVector,
    x_ref: &RationalVector,
    x_star: &RationalVector,
    nonbasic: &[usize],
    constants: &AlgorithmConstants,
) -> Result<EliminationData> {
    let mut best: Option<(Rational, usize)> = None;
    for &j in nonbasic {
        let ratio = quotient(&x[j], &x_ref[j])?;
        if best.as_ref().is_none_or(|(b, _)| ratio > *b) {
            best = Some((ratio, j));
        }
    }
    let (rho, q) = best.ok_or_else(|| invariant("elimination with empty N"))?;
    if rho.is_zero() {
        return Err(invariant("elimination requires x_N ≠ 0"));
    }
    if rho > constants.tau {
        return Err(invariant(format!("elimination requires ρ = {rho} ≤ τ = {}", constants.tau)));
    }
    let factor = &rho / (Rational::one() - &rho);
    let y = x.add_scaled(&factor, &x.sub(x_ref));
    let z = y.add_scaled(&constants.lambda, &x_star.sub(&y));
    if !y[q].is_zero() || !z[q].is_zero() {
        return Err(invariant(format!("y_q = {}, z_q = {} must vanish", y[q], z[q])));
    }
    for &j in nonbasic {
        if y[j].is_positive() || z[j].is_positive() {
            return Err(invariant(format!("extrapolated point is positive on N at {j}")));
        }
    }
    Ok(EliminationData { q, rho, y, z })
}

/// Resumable execution of the walk on one instance.
pub struct Walker<'a> {
    instance: &'a PolyhedronInstance,
    constants: AlgorithmConstants,
    state: AlgorithmState,
}

impl<'a> Walker<'a> {
    pub fn new(
        instance: &'a PolyhedronInstance,
        start: RationalVector,
        target: VertexWithBasis,
        constants: AlgorithmConstants,
    ) -> Result<Self> {
        if constants.m != instance.m() {
            return Err(Error::Dimension(format!(
                "constants for m = {} on an instance with m = {}",
                constants.m,
                instance.m()
            )));
        }
        let state = AlgorithmState::new(instance, start, target)?;
        Ok(Walker { instance, constants, state })
    }

    /// A walker in the main phase at `x`, measuring against `reference` with
    /// the trapped set of `reference`.
    pub fn resume(
        instance: &'a PolyhedronInstance,
        x: RationalVector,
        reference: RationalVector,
        target: VertexWithBasis,
        constants: AlgorithmConstants,
    ) -> Result<Self> {
        if !instance.is_feasible(&reference) {
            return Err(Error::StartInfeasible);
        }
        let mut walker = Walker::new(instance, reference, target, constants)?;
        let m = walker.m();
        if walker.state.nonbasic_support().len() > m {
            return Err(Error::StartInfeasible);
        }
        walker.state.phase = Phase::Main;
        walker.update_trapped()?;
        if !instance.is_feasible(&x) {
            return Err(Error::StartInfeasible);
        }
        if let Some(&j) = walker.state.nonbasic.iter().find(|&&j| !x[j].is_zero() && walker.state.reference_point[j].is_zero()) {
            return Err(invariant(format!("x is positive at {j} where the reference point vanishes")));
        }
        walker.state.x = x;
        Ok(walker)
    }

    pub fn state(&self) -> &AlgorithmState {
        &self.state
    }

    pub fn constants(&self) -> &AlgorithmConstants {
        &self.constants
    }

    fn m(&self) -> usize {
        self.instance.m()
    }

    /// Advances by one augmentation; `None` once the target is reached.
    pub fn next_step(&mut self) -> Result<Option<WalkStep>> {
        loop {
            match self.state.phase {
                Phase::SupportReduction => {
                    if let Some(step) = self.phase1_step()? {
                        return Ok(Some(step));
                    }
                }
                Phase::Main => {
                    if self.state.x == self.state.target.point {
                        self.state.phase = Phase::Done;
                        return Ok(None);
                    }
                    self.update_trapped()?;
                    let step = if self.state.reference_ratio()? > self.constants.tau {
                        self.norm_reduction_step()?
                    } else {
                        self.elimination_step()?
                    };
                    return Ok(Some(step));
                }
                Phase::Done => return Ok(None),
            }
        }
    }

    /// One support-reduction augmentation, or `None` (switching to the main
    /// phase) once `|supp(x_N)| ≤ m`.
    pub fn phase1_step(&mut self) -> Result<Option<WalkStep>> {
        if self.state.phase != Phase::SupportReduction {
            return Err(invariant("phase1_step outside the support-reduction phase"));
        }
        let support = self.state.nonbasic_support();
        if support.len() <= self.m() {
            self.state.phase = Phase::Main;
            self.state.reference_index = self.state.iteration;
            self.state.reference_point = self.state.x.clone();
            return Ok(None);
        }
        let mut g = extract_elementary(self.instance.a(), &support)
            .map_err(|e| invariant(format!("no circuit inside supp(x_N) = {support:?}: {e}")))?;
        if !g.direction().iter().any(Signed::is_negative) {
            g = g.negated();
        }
        let result = self.instance.max_step(&self.state.x, &g).map_err(|e| invariant(format!("phase 1: {e}")))?;
        let limit = self.instance.n().saturating_sub(2 * self.m());
        self.state.x = result.new_point;
        self.state.iteration += 1;
        self.state.phase_one_steps += 1;
        let after = self.state.nonbasic_support();
        if after.len() >= support.len() {
            return Err(invariant("phase 1 step did not shrink supp(x_N)"));
        }
        if self.state.phase_one_steps > limit {
            return Err(invariant(format!("phase 1 exceeded n − 2m = {limit} steps")));
        }
        Ok(Some(WalkStep {
            kind: StepKind::Phase1,
            direction: g.into_direction(),
            step_length: result.step_length,
            blocking_index: result.blocking_index,
            trapped_before: Vec::new(),
            trapped_after: Vec::new(),
            decomposition_size: 0,
            chosen_term: 0,
            elimination: None,
        }))
    }

    /// Recomputes `T` and resets the reference point when it changed or when
    /// `supp(x_N)` shrank since the reference.
    pub fn update_trapped(&mut self) -> Result<()> {
        if self.state.phase != Phase::Main {
            return Err(invariant("update_trapped outside the main phase"));
        }
        let m = self.m();
        let trapped = self.state.trapped_at(m, &self.state.x);
        if let Some(lost) = self.state.trapped.iter().find(|t| !trapped.contains(t)) {
            return Err(invariant(format!("trapped set lost index {lost}")));
        }
        let changed = !self.state.trapped_initialized || trapped != self.state.trapped;
        let support_lost = self
            .state
            .nonbasic
            .iter()
            .any(|&j| self.state.x[j].is_zero() && !self.state.reference_point[j].is_zero());
        self.state.trapped = trapped;
        self.state.trapped_initialized = true;
        if changed || support_lost {
            self.state.reference_index = self.state.iteration;
            self.state.reference_point = self.state.x.clone();
            self.state.window_norm_steps = 0;
        }
        Ok(())
    }

    /// Augments along the term of a conformal decomposition of `x* − x` with
    /// the largest `‖g_N / x⁽ʳ⁾_N‖₁`.
    pub fn norm_reduction_step(&mut self) -> Result<WalkStep> {
        let m = self.m();
        let ratio = self.state.reference_ratio()?;
        if self.state.phase != Phase::Main || ratio <= self.constants.tau {
            return Err(invariant(format!("norm reduction requires ‖x_N/x_N^(r)‖∞ = {ratio} > τ")));
        }
        let difference = self.state.target.point.sub(&self.state.x);
        let decomposition = conformal_decompose(self.instance.a(), &difference)?;
        let k = decomposition.len();
        if k > m {
            return Err(invariant(format!("decomposition of x* − x has {k} > m terms")));
        }
        let (nonbasic, reference) = (&self.state.nonbasic, &self.state.reference_point);
        let mut best: Option<(Rational, usize)> = None;
        for (j, term) in decomposition.terms.iter().enumerate() {
            let progress = weighted_l1(term.direction(), reference, nonbasic)?;
            if best.as_ref().is_none_or(|(b, _)| progress > *b) {
                best = Some((progress, j));
            }
        }
        let (_, chosen) = best.ok_or_else(|| invariant("empty decomposition of x* − x ≠ 0"))?;
        let g = decomposition.terms[chosen].direction().clone();

        let before_norm = weighted_l1(&self.state.x, reference, nonbasic)?;
        let result = self
            .instance
            .max_step_along(&self.state.x, &g)
            .map_err(|e| invariant(format!("norm reduction: {e}")))?;
        let after_norm = weighted_l1(&result.new_point, reference, nonbasic)?;
        let alpha = &result.step_length;
        if *alpha < Rational::one() || *alpha > int(m as i64) {
            return Err(invariant(format!("norm reduction step length {alpha} outside [1, m]")));
        }
        let contraction = Rational::one() - int(m as i64).recip();
        if after_norm > &contraction * &before_norm {
            return Err(invariant(format!(
                "weighted norm went {before_norm} → {after_norm}, above the (1 − 1/m) contraction"
            )));
        }
        self.state.window_norm_steps += 1;
        if self.state.window_norm_steps > norm_reduction_window(m) {
            return Err(invariant(format!(
                "more than {} consecutive norm-reduction steps in one reference window",
                norm_reduction_window(m)
            )));
        }
        self.finish_phase_two_step(StepKind::NormReduction, g, result.step_length, result.blocking_index, k, chosen, None, result.new_point)
    }

    /// Augments along the term of a conformal decomposition of `z − x` with
    /// the most negative entry at `q`.
    pub fn elimination_step(&mut self) -> Result<WalkStep> {
        let m = self.m();
        if self.state.phase != Phase::Main || self.state.x == self.state.target.point {
            return Err(invariant("elimination step requires the main phase and x ≠ x*"));
        }
        let data = compute_elimination_target(
            &self.state.x,
            &self.state.reference_point,
            &self.state.target.point,
            &self.state.nonbasic,
            &self.constants,
        )?;
        let difference = data.z.sub(&self.state.x);
        let decomposition = conformal_decompose(self.instance.a(), &difference)?;
        let k = decomposition.len();
        if k > m {
            return Err(invariant(format!("decomposition of z − x has {k} > m terms")));
        }
        let mut best: Option<(Rational, usize)> = None;
        for (j, term) in decomposition.terms.iter().enumerate() {
            let progress = -&term.direction()[data.q];
            if best.as_ref().is_none_or(|(b, _)| progress > *b) {
                best = Some((progress, j));
            }
        }
        let (_, chosen) = best.ok_or_else(|| invariant("empty decomposition of z − x"))?;
        let g = decomposition.terms[chosen].direction().clone();
        let result = self
            .instance
            .max_step_along(&self.state.x, &g)
            .map_err(|e| invariant(format!("elimination: {e}")))?;
        if result.step_length > int(m as i64) {
            return Err(invariant(format!("elimination step length {} exceeds m", result.step_length)));
        }
        if self.state.trapped.contains(&result.blocking_index) {
            return Err(invariant(format!("elimination blocked at trapped index {}", result.blocking_index)));
        }
        let support_before = self.state.nonbasic_support();
        let support_after: Vec<usize> =
            support_before.iter().copied().filter(|&j| !result.new_point[j].is_zero()).collect();
        let trapped_after = self.state.trapped_at(m, &result.new_point);
        let grew = trapped_after.len() > self.state.trapped.len()
            && self.state.trapped.iter().all(|t| trapped_after.contains(t));
        if support_after.len() == support_before.len() && !grew {
            return Err(invariant("elimination step neither zeroed a coordinate of N nor extended T"));
        }
        self.finish_phase_two_step(
            StepKind::Elimination,
            g,
            result.step_length,
            result.blocking_index,
            k,
            chosen,
            Some(data),
            result.new_point,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_phase_two_step(
        &mut self,
        kind: StepKind,
        direction: RationalVector,
        step_length: Rational,
        blocking_index: usize,
        decomposition_size: usize,
        chosen_term: usize,
        elimination: Option<EliminationData>,
        new_point: RationalVector,
    ) -> Result<WalkStep> {
        let m = self.m();
        if !certify_elementary(self.instance.a(), &direction) {
            return Err(invariant("chosen direction is not elementary"));
        }
        if let Some(&j) = self.state.nonbasic.iter().find(|&&j| direction[j].is_positive()) {
            return Err(invariant(format!("phase 2 direction is positive on N at {j}")));
        }
        let trapped_after = self.state.trapped_at(m, &new_point);
        let mm = int(m as i64);
        for &t in &self.state.trapped {
            if new_point[t] > &mm * &self.state.target.point[t] {
                return Err(invariant(format!("trapped index {t} escaped: {} > m·{}", new_point[t], self.state.target.point[t])));
            }
        }
        self.state.x = new_point;
        self.state.iteration += 1;
        self.state.phase_two_steps += 1;
        if self.state.phase_two_steps > phase_two_budget(m) {
            return Err(invariant(format!("phase 2 exceeded {} steps", phase_two_budget(m))));
        }
        Ok(WalkStep {
            kind,
            direction,
            step_length,
            blocking_index,
            trapped_before: self.state.trapped.clone(),
            trapped_after,
            decomposition_size,
            chosen_term,
            elimination,
        })
    }
}

/// Columns `supp(u) ∪ supp(v) ∪ B(v)` of an instance, with the map back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnRestriction {
    pub instance: PolyhedronInstance,
    /// `columns[k]` is the original index of sub-instance column `k`.
    pub columns: Vec<usize>,
}

impl ColumnRestriction {
    pub fn restrict(&self, x: &RationalVector) -> RationalVector {
        x.select(&self.columns)
    }

    pub fn lift(&self, x: &RationalVector, n: usize) -> RationalVector {
        x.lift(n, &self.columns)
    }

    pub fn lift_indices(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&k| self.columns[k]).collect()
    }

    /// Position of the original index `j`, if kept.
    pub fn position(&self, j: usize) -> Option<usize> {
        self.columns.binary_search(&j).ok()
    }
}

/// Restricts `p` to the columns a walk from `u` to the vertex `v` can use.
/// The target basis is kept so that the sub-instance retains rank `m`.
pub fn restrict_columns(p: &PolyhedronInstance, u: &RationalVector, v: &VertexWithBasis) -> Result<ColumnRestriction> {
    let mut columns: Vec<usize> = u.support();
    columns.extend(v.point.support());
    columns.extend(&v.basis);
    columns.sort_unstable();
    columns.dedup();
    let instance = PolyhedronInstance::new(p.a().select_columns(&columns), p.b().clone())?;
    if instance.m() != p.m() {
        return Err(invariant("restricted instance lost rank"));
    }
    Ok(ColumnRestriction { instance, columns })
}

fn collect_steps(walker: &mut Walker<'_>, budget: usize) -> Result<Vec<WalkStep>> {
    let mut steps = Vec::new();
    while let Some(step) = walker.next_step()? {
        steps.push(step);
        if steps.len() > budget {
            return Err(invariant(format!("walk exceeded its length budget {budget}")));
        }
    }
    if walker.state().x != walker.state().target.point {
        return Err(invariant("walk ended away from the target"));
    }
    Ok(steps)
}

/// A circuit walk from `start` to `target` with the certified constants.
pub fn run_walk(
    p: &PolyhedronInstance,
    start: &RationalVector,
    target: &VertexWithBasis,
    mode: WalkMode,
) -> Result<WalkTrace> {
    run_walk_with(p, start, target, mode, AlgorithmConstants::certified(p.m()))
}

pub fn run_walk_with(
    p: &PolyhedronInstance,
    start: &RationalVector,
    target: &VertexWithBasis,
    mode: WalkMode,
    constants: AlgorithmConstants,
) -> Result<WalkTrace> {
    if !p.is_feasible(start) {
        return Err(Error::StartInfeasible);
    }
    target.validate(p)?;
    let budget = mode.budget(p.n(), p.m());
    let steps = match mode {
        WalkMode::AnyFeasibleStart => {
            let mut walker = Walker::new(p, start.clone(), target.clone(), constants.clone())?;
            collect_steps(&mut walker, budget)?
        }
        WalkMode::VertexToVertexRestricted => {
            p.basis_from_vertex(start).map_err(|_| Error::StartInfeasible)?;
            let restriction = restrict_columns(p, start, target)?;
            let sub_target = VertexWithBasis {
                point: restriction.restrict(&target.point),
                basis: target
                    .basis
                    .iter()
                    .map(|&j| restriction.position(j).expect("basis columns are kept"))
                    .collect(),
            };
            let sub_start = restriction.restrict(start);
            let mut walker = Walker::new(&restriction.instance, sub_start, sub_target, constants.clone())?;
            let n = p.n();
            collect_steps(&mut walker, budget)?
                .into_iter()
                .map(|step| WalkStep {
                    direction: restriction.lift(&step.direction, n),
                    blocking_index: restriction.columns[step.blocking_index],
                    trapped_before: restriction.lift_indices(&step.trapped_before),
                    trapped_after: restriction.lift_indices(&step.trapped_after),
                    elimination: step.elimination.map(|e| EliminationData {
                        q: restriction.columns[e.q],
                        rho: e.rho,
                        y: restriction.lift(&e.y, n),
                        z: restriction.lift(&e.z, n),
                    }),
                    ..step
                })
                .collect()
        }
    };
    Ok(WalkTrace {
        instance: p.clone(),
        start: start.clone(),
        target: target.clone(),
        steps,
        constants,
        mode,
        objective: None,
    })
}

/// Solves `min cᵀx` and walks from `start` to the optimal vertex found.
pub fn solve_and_walk(
    p: &PolyhedronInstance,
    start: &RationalVector,
    c: &RationalVector,
    mode: WalkMode,
) -> Result<WalkTrace> {
    let target = p.solve_lp(c)?;
    let mut trace = run_walk(p, start, &target, mode)?;
    trace.objective = Some(c.clone());
    Ok(trace)
}
