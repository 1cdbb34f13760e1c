//! Seeded generators for test polyhedra.

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{frac, int, Rational, RationalMatrix, RationalVector};
use crate::polyhedron::{PolyhedronInstance, VertexWithBasis};
use crate::walk::{AlgorithmConstants, Walker};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeneratorSpec {
    Cube { d: usize },
    Transportation { p: usize, q: usize, seed: u64 },
    NetworkFlow { nodes: usize, extra_arcs: usize, seed: u64 },
    RandomRational { m: usize, n: usize, magnitude: i64, seed: u64 },
}

impl GeneratorSpec {
    pub fn family(&self) -> &'static str {
        match self {
            GeneratorSpec::Cube { .. } => "cube",
            GeneratorSpec::Transportation { .. } => "transportation",
            GeneratorSpec::NetworkFlow { .. } => "network",
            GeneratorSpec::RandomRational { .. } => "random",
        }
    }

    /// The instance, plus a known vertex when the family provides one.
    pub fn build(&self) -> (PolyhedronInstance, Option<VertexWithBasis>) {
        match *self {
            GeneratorSpec::Cube { d } => (gen_cube(d), None),
            GeneratorSpec::Transportation { p, q, seed } => (gen_transportation(p, q, seed), None),
            GeneratorSpec::NetworkFlow { nodes, extra_arcs, seed } => (gen_network_flow(nodes, extra_arcs, seed), None),
            GeneratorSpec::RandomRational { m, n, magnitude, seed } => {
                let (p, v) = gen_random_rational(m, n, magnitude, seed);
                (p, Some(v))
            }
        }
    }
}

/// `d` rows `x_{2i} + x_{2i+1} = 1`: the unit cube in standard form, with
/// each coordinate paired with its complement.
pub fn gen_cube(d: usize) -> PolyhedronInstance {
    assert!(d >= 2, "cube needs d >= 2");
    let rows = (0..d)
        .map(|i| (0..2 * d).map(|j| int((j / 2 == i) as i64)).collect())
        .collect();
    PolyhedronInstance::new(RationalMatrix::from_rows(rows).expect("nonempty"), RationalVector::new(vec![int(1); d]))
        .expect("cube has full row rank")
}

/// Complete bipartite `p × q` transportation polytope; variable `i·q + j`
/// ships from supply `i` to demand `j`. The last demand row is dropped.
pub fn gen_transportation(p: usize, q: usize, seed: u64) -> PolyhedronInstance {
    assert!(p >= 2 && q >= 2, "transportation needs p, q >= 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut supply: Vec<i64> = (0..p).map(|_| rng.gen_range(1..=9)).collect();
    let mut demand: Vec<i64> = (0..q).map(|_| rng.gen_range(1..=9)).collect();
    let (s, d): (i64, i64) = (supply.iter().sum(), demand.iter().sum());
    if s < d {
        supply[p - 1] += d - s;
    } else {
        demand[q - 1] += s - d;
    }
    let n = p * q;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, &s) in supply.iter().enumerate() {
        rows.push((0..n).map(|v| int((v / q == i) as i64)).collect());
        rhs.push(int(s));
    }
    for (j, &d) in demand.iter().enumerate().take(q - 1) {
        rows.push((0..n).map(|v| int((v % q == j) as i64)).collect());
        rhs.push(int(d));
    }
    PolyhedronInstance::new(RationalMatrix::from_rows(rows).expect("nonempty"), RationalVector::new(rhs))
        .expect("balanced transportation system")
}

/// Node-arc incidence system of a connected digraph (a path through all
/// nodes plus `extra_arcs` random arcs) with the last node's row dropped;
/// `b` is the net outflow of a random nonnegative flow.
pub fn gen_network_flow(nodes: usize, extra_arcs: usize, seed: u64) -> PolyhedronInstance {
    assert!(nodes >= 3, "network needs at least 3 nodes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs: Vec<(usize, usize)> = (0..nodes - 1).map(|i| (i, i + 1)).collect();
    while arcs.len() < nodes - 1 + extra_arcs {
        let (u, v) = (rng.gen_range(0..nodes), rng.gen_range(0..nodes));
        if u != v {
            arcs.push((u, v));
        }
    }
    let flow: Vec<i64> = arcs.iter().map(|_| if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..=5) }).collect();
    let rows: Vec<Vec<Rational>> = (0..nodes - 1)
        .map(|node| {
            arcs.iter()
                .map(|&(u, v)| int((u == node) as i64 - (v == node) as i64))
                .collect()
        })
        .collect();
    let a = RationalMatrix::from_rows(rows).expect("nonempty");
    let b = a.mul_vec(&flow.iter().map(|&f| int(f)).collect());
    PolyhedronInstance::new(a, b).expect("connected incidence matrix has full row rank")
}

fn random_rational(rng: &mut ChaCha8Rng, magnitude: i64) -> Rational {
    frac(rng.gen_range(-magnitude..=magnitude), rng.gen_range(1..=magnitude))
}

/// Random `m × n` rational system of rank `m` with a known vertex: `b = A·x₀`
/// for a nonnegative `x₀` supported on a random basis.
pub fn gen_random_rational(m: usize, n: usize, magnitude: i64, seed: u64) -> (PolyhedronInstance, VertexWithBasis) {
    assert!(2 <= m && m < n, "need 2 <= m < n");
    assert!(magnitude >= 1, "magnitude must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = loop {
        let data = (0..m * n)
            .map(|_| if rng.gen_bool(0.25) { Rational::zero() } else { random_rational(&mut rng, magnitude) })
            .collect();
        let a = RationalMatrix::new(m, n, data).expect("nonempty");
        if a.rank() == m {
            break a;
        }
    };
    let mut columns: Vec<usize> = (0..n).collect();
    let basis = loop {
        columns.shuffle(&mut rng);
        let mut basis = columns[..m].to_vec();
        basis.sort_unstable();
        if a.rank_of_columns(&basis) == m {
            break basis;
        }
    };
    let x_b: RationalVector = (0..m)
        .map(|_| {
            if rng.gen_bool(0.125) {
                Rational::zero()
            } else {
                frac(rng.gen_range(1..=magnitude), rng.gen_range(1..=magnitude))
            }
        })
        .collect();
    let point = x_b.lift(n, &basis);
    let b = a.mul_vec(&point);
    let instance = PolyhedronInstance::new(a, b).expect("rank m by construction");
    (instance, VertexWithBasis { point, basis })
}

/// Optimal vertex for a seeded random objective `c ≥ 0` (always bounded).
pub fn random_vertex(p: &PolyhedronInstance, seed: u64) -> Result<VertexWithBasis> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: RationalVector = (0..p.n()).map(|_| int(rng.gen_range(0..=6))).collect();
    p.solve_lp(&c)
}

/// Seeded convex combination of a few random vertices; typically supported
/// on more than `m` coordinates.
pub fn random_feasible_point(p: &PolyhedronInstance, seed: u64) -> Result<RationalVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(2..=4);
    let mut weights: Vec<Rational> = (0..count).map(|_| int(rng.gen_range(1..=5))).collect();
    let total: Rational = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= &total);
    let mut point = RationalVector::zeros(p.n());
    for (k, w) in weights.iter().enumerate() {
        let vertex = random_vertex(p, seed.wrapping_mul(31).wrapping_add(k as u64 + 1))?;
        point = point.add_scaled(w, &vertex.point);
    }
    Ok(point)
}

/// A main-phase configuration whose next step is an elimination step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationState {
    pub instance: PolyhedronInstance,
    pub target: VertexWithBasis,
    pub reference: RationalVector,
    pub point: RationalVector,
}

/// Seeded elimination state on a random instance: the reference point `r`
/// has `|supp(r_N)| ≤ m` and traps all of `B`, and the point is
/// `x* + t(r − x*) + δh` for a small kernel vector `h` supported on
/// `supp(r) ∪ B`, with `‖x_N / r_N‖∞ ≤ τ` and the same trapped set.
/// `None` when the draw does not yield such a state.
pub fn gen_elimination_state(m: usize, n: usize, magnitude: i64, seed: u64) -> Option<EliminationState> {
    let (instance, _) = gen_random_rational(m, n, magnitude, seed);
    let target = random_vertex(&instance, seed ^ 0x5eed).ok()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let constants = AlgorithmConstants::certified(m);
    let start = random_feasible_point(&instance, seed.wrapping_add(1)).ok()?;
    let mut walker = Walker::new(&instance, start, target.clone(), constants.clone()).ok()?;
    while walker.phase1_step().ok()?.is_some() {}
    let mm = int(m as i64);
    let nonbasic = target.nonbasic(n);

    let mut reference = walker.state().x.clone();
    let all_trapped = |x: &RationalVector| target.basis.iter().all(|&t| x[t] <= &mm * &target.point[t]);
    for _ in 0..64 {
        if all_trapped(&reference) {
            break;
        }
        reference = target.point.add_scaled(&frac(1, 2), &reference.sub(&target.point));
    }
    if !all_trapped(&reference) || nonbasic.iter().all(|&j| reference[j].is_zero()) {
        return None;
    }

    let mut columns: Vec<usize> = (0..n).filter(|&j| !reference[j].is_zero()).collect();
    columns.extend(target.basis.iter().copied());
    columns.sort_unstable();
    columns.dedup();
    let kernel = instance.a().select_columns(&columns).kernel_basis();
    let h = kernel
        .iter()
        .fold(RationalVector::zeros(columns.len()), |acc, k| acc.add_scaled(&int(rng.gen_range(-3..=3)), k))
        .lift(n, &columns);

    let t = &constants.tau / int(2);
    let mut delta = frac(1, rng.gen_range(1..=4));
    for &j in &nonbasic {
        if !h[j].is_zero() {
            delta = delta.min(&t * &reference[j] / (int(2) * h[j].abs()));
        }
    }
    let point = target.point.add_scaled(&t, &reference.sub(&target.point)).add_scaled(&delta, &h);
    if !instance.is_feasible(&point) || !all_trapped(&point) {
        return None;
    }
    let state = EliminationState { instance, target, reference, point };
    let walker = Walker::resume(
        &state.instance,
        state.point.clone(),
        state.reference.clone(),
        state.target.clone(),
        constants.clone(),
    )
    .ok()?;
    (walker.state().reference_ratio().ok()? <= constants.tau).then_some(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{circuit_imbalance, DEFAULT_ENUMERATION_BUDGET};
    use crate::walk::StepKind;

    #[test]
    fn cube_shapes() {
        let p = gen_cube(2);
        assert_eq!(p.a(), &RationalMatrix::from_i64(&[[1, 1, 0, 0], [0, 0, 1, 1]]));
        let p = gen_cube(3);
        assert_eq!((p.m(), p.n()), (3, 6));
        let vertices = (0..8u32)
            .filter(|mask| {
                let basis: Vec<usize> = (0..3).map(|i| 2 * i + (mask >> i & 1) as usize).collect();
                p.vertex_from_basis(&basis).is_ok()
            })
            .count();
        assert_eq!(vertices, 8);
        for d in 2..=4 {
            assert_eq!(circuit_imbalance(gen_cube(d).a(), DEFAULT_ENUMERATION_BUDGET).unwrap().value, int(1));
        }
    }

    #[test]
    fn transportation_shapes() {
        let p = gen_transportation(2, 2, 5);
        assert_eq!((p.m(), p.n()), (3, 4));
        assert!(p.find_feasible_point().is_ok());
        assert_eq!(circuit_imbalance(p.a(), DEFAULT_ENUMERATION_BUDGET).unwrap().value, int(1));
        let p = gen_transportation(3, 3, 9);
        assert_eq!((p.m(), p.n()), (5, 9));
        assert!(p.find_feasible_point().is_ok());
    }

    #[test]
    fn network_shapes() {
        let p = gen_network_flow(4, 3, 2);
        assert_eq!((p.m(), p.n()), (3, 6));
        assert!(p.find_feasible_point().is_ok());
        assert_eq!(circuit_imbalance(p.a(), DEFAULT_ENUMERATION_BUDGET).unwrap().value, int(1));
    }

    #[test]
    fn random_is_reproducible_and_certified() {
        let (p, v) = gen_random_rational(2, 5, 5, 1);
        assert_eq!(gen_random_rational(2, 5, 5, 1), (p.clone(), v.clone()));
        assert!(v.validate(&p).is_ok());
        assert_eq!(p.a().rank(), 2);
        for seed in 0..20 {
            let (p, v) = gen_random_rational(3, 7, 4, seed);
            assert_eq!(p.a().rank(), 3);
            assert!(v.validate(&p).is_ok());
        }
        assert_ne!(gen_random_rational(2, 5, 5, 1).0, gen_random_rational(2, 5, 5, 2).0);
        assert_ne!(gen_random_rational(3, 6, 5, 7).0, gen_random_rational(3, 6, 5, 8).0);
    }

    #[test]
    fn random_points_are_feasible() {
        let (p, _) = gen_random_rational(3, 8, 5, 4);
        assert!(p.is_feasible(&random_feasible_point(&p, 11).unwrap()));
        assert!(random_vertex(&p, 3).unwrap().validate(&p).is_ok());
    }

    #[test]
    fn elimination_states_take_elimination_steps() {
        let mut found = 0;
        for seed in 0..200 {
            let m = 2 + (seed % 3) as usize;
            let Some(state) = gen_elimination_state(m, m + 2 + (seed % 4) as usize, 5, seed) else { continue };
            found += 1;
            let mut w = Walker::resume(
                &state.instance,
                state.point.clone(),
                state.reference.clone(),
                state.target.clone(),
                AlgorithmConstants::certified(m),
            )
            .unwrap();
            let step = w.next_step().unwrap_or_else(|e| panic!("seed {seed}: {e}")).unwrap();
            assert_eq!(step.kind, StepKind::Elimination, "seed {seed}");
        }
        println!("elimination states: {found}");
        assert!(found >= 50, "only {found} elimination states");
    }
}
