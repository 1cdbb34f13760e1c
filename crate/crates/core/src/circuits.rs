//! Elementary vectors (circuits of the column matroid), conformal circuit
//! decompositions and the circuit imbalance measure.

use num_traits::{One, Signed, Zero};

use crate::error::{invariant, Error, Result};
use crate::linalg::{Rational, RationalMatrix, RationalVector};

/// Default cap on the number of candidate supports `enumerate_circuits`
/// is willing to inspect.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 2_000_000;

/// A support-minimal nonzero kernel vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementaryVector {
    direction: RationalVector,
    support: Vec<usize>,
}

impl ElementaryVector {
    /// Certifies `direction` against `a` before wrapping it.
    pub fn new(a: &RationalMatrix, direction: RationalVector) -> Result<Self> {
        if !certify_elementary(a, &direction) {
            return Err(invariant(format!("{direction} is not an elementary vector")));
        }
        Ok(Self::trusted(direction))
    }

    pub(crate) fn trusted(direction: RationalVector) -> Self {
        let support = direction.support();
        ElementaryVector { direction, support }
    }

    pub fn direction(&self) -> &RationalVector {
        &self.direction
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn into_direction(self) -> RationalVector {
        self.direction
    }

    pub fn scaled(&self, factor: &Rational) -> ElementaryVector {
        assert!(!factor.is_zero(), "scaling an elementary vector by zero");
        ElementaryVector::trusted(self.direction.scale(factor))
    }

    pub fn negated(&self) -> ElementaryVector {
        ElementaryVector::trusted(self.direction.neg())
    }

    /// Same circuit, first nonzero entry +1.
    pub fn canonical(&self) -> ElementaryVector {
        ElementaryVector::trusted(self.direction.canonical())
    }
}

/// True iff `g` is a nonzero kernel vector whose support spans a
/// one-dimensional kernel (so no kernel vector has strictly smaller support).
pub fn certify_elementary(a: &RationalMatrix, g: &RationalVector) -> bool {
    if g.len() != a.cols() || g.is_zero() || !a.mul_vec(g).is_zero() {
        return false;
    }
    let support = g.support();
    support.len() - a.rank_of_columns(&support) == 1
}

/// An elementary vector supported inside `within`.
///
/// Picks the circuit inside the shortest dependent prefix of `within`
/// (sorted ascending); that prefix has a one-dimensional kernel, so the
/// choice is unique. Scaled canonically.
pub fn extract_elementary(a: &RationalMatrix, within: &[usize]) -> Result<ElementaryVector> {
    let mut cols: Vec<usize> = within.to_vec();
    cols.sort_unstable();
    cols.dedup();
    if cols.iter().any(|&j| j >= a.cols()) {
        return Err(Error::Dimension("column index out of range".into()));
    }
    if cols.is_empty() {
        return Err(Error::NoCircuit);
    }
    let (reduced, pivots) = a.select_columns(&cols).rref();
    let Some(free) = (0..cols.len()).find(|k| !pivots.contains(k)) else {
        return Err(Error::NoCircuit);
    };
    let mut direction = RationalVector::zeros(a.cols()).into_inner();
    direction[cols[free]] = Rational::one();
    for (row, &p) in pivots.iter().enumerate().take_while(|(_, &p)| p < free) {
        direction[cols[p]] = -reduced.get(row, free);
    }
    let direction = RationalVector::new(direction).canonical();
    debug_assert!(certify_elementary(a, &direction));
    Ok(ElementaryVector::trusted(direction))
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of supports of size 1..=m+1 that exhaustive enumeration inspects.
pub fn enumeration_candidates(a: &RationalMatrix) -> u128 {
    let n = a.cols() as u128;
    let top = (a.rows() as u128 + 1).min(n);
    (1..=top).fold(0u128, |acc, k| acc.saturating_add(binomial(n, k)))
}

fn for_each_subset(n: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    let mut subset: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        visit(&subset);
        let Some(i) = (0..k).rev().find(|&i| subset[i] != i + n - k) else {
            return;
        };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// All circuits of the column matroid of `a`, one canonical representative
/// per support, ordered by support (lexicographically).
///
/// A support `S` is a circuit iff `A_S` has rank `|S| - 1` and deleting
/// any one column leaves an independent set.
pub fn enumerate_circuits(a: &RationalMatrix, budget: u128) -> Result<Vec<ElementaryVector>> {
    let candidates = enumeration_candidates(a);
    if candidates > budget {
        return Err(Error::BudgetExceeded { candidates, budget });
    }
    let n = a.cols();
    let top = (a.rows() + 1).min(n);
    let mut circuits = Vec::new();
    for k in 1..=top {
        for_each_subset(n, k, &mut |subset| {
            if a.rank_of_columns(subset) != k - 1 {
                return;
            }
            let minimal = (0..k).all(|drop| {
                let rest: Vec<usize> = subset
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != drop)
                    .map(|(_, &j)| j)
                    .collect();
                a.rank_of_columns(&rest) == k - 1
            });
            if minimal {
                let kernel = a.select_columns(subset).kernel_basis();
                let direction = kernel[0].lift(n, subset).canonical();
                circuits.push(ElementaryVector::trusted(direction));
            }
        });
    }
    circuits.sort_by(|x, y| x.support.cmp(&y.support));
    Ok(circuits)
}

/// `x ⊑ y`: sign-compatible and componentwise no larger in absolute value.
pub fn is_conformal(x: &RationalVector, y: &RationalVector) -> bool {
    x.len() == y.len()
        && x.iter().zip(y.iter()).all(|(a, b)| {
            !(a * b).is_negative() && a.abs() <= b.abs()
        })
}

pub fn sign_compatible(x: &RationalVector, y: &RationalVector) -> bool {
    x.iter().zip(y.iter()).all(|(a, b)| !(a * b).is_negative())
}

/// A kernel vector written as a sum of conformal elementary vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConformalDecomposition {
    pub target: RationalVector,
    pub terms: Vec<ElementaryVector>,
}

impl ConformalDecomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sum(&self) -> RationalVector {
        self.terms
            .iter()
            .fold(RationalVector::zeros(self.target.len()), |acc, t| acc.add(t.direction()))
    }
}

/// Finds an elementary vector sign-compatible with the kernel vector `r`
/// and supported inside `supp(r)`.
///
/// Takes the extracted circuit `h` in `supp(r)`; if neither `h` nor `-h`
/// is sign-compatible with `r`, moves to `r - t·h` for the largest `t`
/// keeping sign-compatibility, which strictly shrinks the support, and
/// repeats there.
fn conformal_circuit(a: &RationalMatrix, r: &RationalVector) -> Result<ElementaryVector> {
    let mut current = r.clone();
    loop {
        let support = current.support();
        let h = extract_elementary(a, &support)
            .map_err(|_| invariant(format!("{current} is not a kernel vector")))?;
        if sign_compatible(h.direction(), &current) {
            return Ok(h);
        }
        let h = h.negated();
        if sign_compatible(h.direction(), &current) {
            return Ok(h);
        }
        // h now has mixed signs relative to current; shrink along it.
        let t = h
            .support()
            .iter()
            .filter(|&&i| (&h.direction()[i] * &current[i]).is_positive())
            .map(|&i| &current[i] / &h.direction()[i])
            .min()
            .expect("mixed-sign circuit has an agreeing coordinate");
        let next = current.add_scaled(&-t, h.direction());
        debug_assert!(next.support().len() < support.len());
        debug_assert!(sign_compatible(&next, &current));
        current = next;
    }
}

/// Conformal circuit decomposition of the kernel vector `x`.
///
/// Greedy peel-off: repeatedly subtract the largest multiple of a conformal
/// circuit of the residual that keeps the residual conformal to `x`, which
/// zeroes at least one coordinate per term. The result is then passed
/// through [`caratheodory_reduce`], so the term count is at most
/// `min(dim ker A_supp(x), |supp(x)|)`.
pub fn conformal_decompose(a: &RationalMatrix, x: &RationalVector) -> Result<ConformalDecomposition> {
    if x.len() != a.cols() {
        return Err(Error::Dimension(format!("vector of length {} for {} columns", x.len(), a.cols())));
    }
    if !a.mul_vec(x).is_zero() {
        return Err(invariant(format!("{x} is not in the kernel")));
    }
    let mut residual = x.clone();
    let mut terms = Vec::new();
    while !residual.is_zero() {
        let g = conformal_circuit(a, &residual)?;
        let mu = g
            .support()
            .iter()
            .map(|&i| &residual[i] / &g.direction()[i])
            .min()
            .expect("nonempty circuit support");
        let term = g.scaled(&mu);
        residual = residual.sub(term.direction());
        terms.push(term);
    }
    let decomposition = ConformalDecomposition { target: x.clone(), terms };
    caratheodory_reduce(a, decomposition)
}

/// Removes linear dependencies among the terms of a decomposition.
///
/// With `Σ μ_j t_j = 0`, the coefficients `1 - θ μ_j` still reproduce the
/// target; `θ` is chosen so that all stay nonnegative and at least one
/// vanishes. Terms never change sign, so conformality is preserved.
pub fn caratheodory_reduce(
    a: &RationalMatrix,
    decomposition: ConformalDecomposition,
) -> Result<ConformalDecomposition> {
    let ConformalDecomposition { target, mut terms } = decomposition;
    debug_assert!(terms.iter().all(|t| certify_elementary(a, t.direction())));
    while terms.len() > 1 {
        let columns: Vec<Vec<Rational>> = (0..target.len())
            .map(|i| terms.iter().map(|t| t.direction()[i].clone()).collect())
            .collect();
        let stacked = RationalMatrix::from_rows(columns).expect("nonempty terms");
        let Some(mut mu) = stacked.kernel_basis().into_iter().next() else {
            break;
        };
        if !mu.iter().any(Signed::is_positive) {
            mu = mu.neg();
        }
        let theta = mu
            .iter()
            .filter(|m| m.is_positive())
            .map(|m| m.recip())
            .min()
            .expect("some coefficient is positive");
        let mut next = Vec::with_capacity(terms.len());
        for (term, m) in terms.iter().zip(mu.iter()) {
            let coefficient = Rational::one() - &theta * m;
            if coefficient.is_positive() {
                next.push(term.scaled(&coefficient));
            } else if coefficient.is_negative() {
                return Err(invariant("Carathéodory step produced a negative coefficient"));
            }
        }
        terms = next;
    }
    Ok(ConformalDecomposition { target, terms })
}

/// `κ(A)`: the largest ratio `|g_i| / |g_j|` within any circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitImbalance {
    pub value: Rational,
}

pub fn circuit_imbalance(a: &RationalMatrix, budget: u128) -> Result<CircuitImbalance> {
    let circuits = enumerate_circuits(a, budget)?;
    circuits
        .iter()
        .map(|g| {
            let magnitudes: Vec<Rational> = g.support().iter().map(|&i| g.direction()[i].abs()).collect();
            let max = magnitudes.iter().max().expect("nonempty");
            let min = magnitudes.iter().min().expect("nonempty");
            max / min
        })
        .max()
        .map(|value| CircuitImbalance { value })
        .ok_or(Error::NoCircuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;

    fn block() -> RationalMatrix {
        RationalMatrix::from_i64(&[[1, 1, 0, 0], [0, 0, 1, 1]])
    }

    fn triangle() -> RationalMatrix {
        RationalMatrix::from_i64(&[[1, 0, 1], [0, 1, 1]])
    }

    #[test]
    fn extract_examples() {
        let g = extract_elementary(&triangle(), &[0, 1, 2]).unwrap();
        assert_eq!(g.direction(), &RationalVector::from_i64(&[1, 1, -1]));
        assert_eq!(g.support(), &[0, 1, 2]);

        assert_eq!(
            extract_elementary(&RationalMatrix::identity(2), &[0, 1]),
            Err(Error::NoCircuit)
        );

        let g = extract_elementary(&block(), &[0, 1]).unwrap();
        assert_eq!(g.direction(), &RationalVector::from_i64(&[1, -1, 0, 0]));
    }

    #[test]
    fn certify_examples() {
        assert!(certify_elementary(&triangle(), &RationalVector::from_i64(&[1, 1, -1])));
        assert!(!certify_elementary(&block(), &RationalVector::from_i64(&[1, -1, 1, -1])));
        assert!(!certify_elementary(&triangle(), &RationalVector::from_i64(&[1, 0, 0])));
        assert!(!certify_elementary(&triangle(), &RationalVector::zeros(3)));
    }

    #[test]
    fn enumerate_examples() {
        let supports = |a: &RationalMatrix| -> Vec<Vec<usize>> {
            enumerate_circuits(a, DEFAULT_ENUMERATION_BUDGET)
                .unwrap()
                .iter()
                .map(|g| g.support().to_vec())
                .collect()
        };
        assert_eq!(supports(&block()), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(supports(&triangle()), vec![vec![0, 1, 2]]);
        assert_eq!(
            supports(&RationalMatrix::from_i64(&[[1, 1, 1]])),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        for g in enumerate_circuits(&block(), DEFAULT_ENUMERATION_BUDGET).unwrap() {
            assert_eq!(g.direction()[g.support()[0]], int(1));
        }
    }

    #[test]
    fn enumerate_refuses_over_budget() {
        let a = RationalMatrix::from_i64(&[[1, 2, 3, 4, 5, 6], [0, 1, 0, 1, 0, 1]]);
        // 6 + 15 + 20 supports of size <= 3
        assert_eq!(enumeration_candidates(&a), 41);
        assert_eq!(
            enumerate_circuits(&a, 40),
            Err(Error::BudgetExceeded { candidates: 41, budget: 40 })
        );
        assert!(enumerate_circuits(&a, 41).is_ok());
    }

    fn assert_valid(a: &RationalMatrix, d: &ConformalDecomposition) {
        assert_eq!(d.sum(), d.target);
        for t in &d.terms {
            assert!(is_conformal(t.direction(), &d.target));
            assert!(certify_elementary(a, t.direction()));
        }
        let support = d.target.support();
        let kernel_dim = support.len() - a.rank_of_columns(&support);
        assert!(d.len() <= kernel_dim.min(support.len()));
    }

    #[test]
    fn decompose_examples() {
        let d = conformal_decompose(&block(), &RationalVector::zeros(4)).unwrap();
        assert!(d.is_empty());

        let x = RationalVector::from_i64(&[2, -2, 3, -3]);
        let d = conformal_decompose(&block(), &x).unwrap();
        assert_valid(&block(), &d);
        let mut got: Vec<RationalVector> = d.terms.iter().map(|t| t.direction().clone()).collect();
        got.sort();
        let mut want = vec![
            RationalVector::from_i64(&[2, -2, 0, 0]),
            RationalVector::from_i64(&[0, 0, 3, -3]),
        ];
        want.sort();
        assert_eq!(got, want);

        let a = RationalMatrix::from_i64(&[[1, 1, 1]]);
        let x = RationalVector::from_i64(&[1, 1, -2]);
        let d = conformal_decompose(&a, &x).unwrap();
        assert_valid(&a, &d);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn decompose_rejects_non_kernel() {
        assert!(matches!(
            conformal_decompose(&block(), &RationalVector::from_i64(&[1, 0, 0, 0])),
            Err(Error::InternalInvariantViolation(_))
        ));
    }

    #[test]
    fn caratheodory_examples() {
        let a = RationalMatrix::from_i64(&[[1, 1, 1]]);
        let t = |v: &[i64]| ElementaryVector::trusted(RationalVector::from_i64(v));
        let d = ConformalDecomposition {
            target: RationalVector::from_i64(&[2, 1, -3]),
            terms: vec![t(&[1, 0, -1]), t(&[1, 0, -1]), t(&[0, 1, -1])],
        };
        let reduced = caratheodory_reduce(&a, d).unwrap();
        assert_eq!(reduced.len(), 2);
        assert_valid(&a, &reduced);

        let minimal = conformal_decompose(&block(), &RationalVector::from_i64(&[2, -2, 3, -3])).unwrap();
        assert_eq!(caratheodory_reduce(&block(), minimal.clone()).unwrap(), minimal);

        let single = ConformalDecomposition {
            target: RationalVector::from_i64(&[1, -1, 0, 0]),
            terms: vec![t(&[1, -1, 0, 0])],
        };
        assert_eq!(caratheodory_reduce(&block(), single.clone()).unwrap(), single);
    }

    #[test]
    fn imbalance_examples() {
        let b = DEFAULT_ENUMERATION_BUDGET;
        assert_eq!(circuit_imbalance(&block(), b).unwrap().value, int(1));
        let a = RationalMatrix::from_i64(&[[1, 2, 0], [0, 0, 1]]);
        assert_eq!(circuit_imbalance(&a, b).unwrap().value, int(2));
        // node-arc incidence of the digraph 0->1, 1->2, 0->2, last node row dropped
        let a = RationalMatrix::from_i64(&[[1, 0, 1], [-1, 1, 0]]);
        assert_eq!(circuit_imbalance(&a, b).unwrap().value, int(1));
        let a = RationalMatrix::from_i64(&[[3, 1, 0], [0, 0, 1]]);
        assert_eq!(circuit_imbalance(&a, b).unwrap().value, int(3));
        assert_eq!(circuit_imbalance(&RationalMatrix::identity(2), b), Err(Error::NoCircuit));
    }
}
