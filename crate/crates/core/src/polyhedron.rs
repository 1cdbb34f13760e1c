//! Polyhedra `{x : Ax = b, x ≥ 0}`: feasibility, bases and vertices,
//! maximal augmentation along a direction, and an exact simplex method.

use num_traits::{Signed, Zero};

use crate::circuits::ElementaryVector;
use crate::error::{invariant, Error, Result};
use crate::linalg::{Rational, RationalMatrix, RationalVector};

/// `P = {x : Ax = b, x ≥ 0}` with `A` of full row rank `m ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyhedronInstance {
    a: RationalMatrix,
    b: RationalVector,
}

impl PolyhedronInstance {
    /// Drops redundant rows; rejects inconsistent systems and systems with
    /// fewer than two independent rows.
    pub fn new(a: RationalMatrix, b: RationalVector) -> Result<Self> {
        let (a, b) = a.drop_dependent_rows(&b)?;
        if a.rows() < 2 {
            return Err(Error::TooFewRows(a.rows()));
        }
        Ok(PolyhedronInstance { a, b })
    }

    pub fn a(&self) -> &RationalMatrix {
        &self.a
    }

    pub fn b(&self) -> &RationalVector {
        &self.b
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn is_feasible(&self, x: &RationalVector) -> bool {
        x.len() == self.n() && x.is_nonnegative() && self.a.mul_vec(x) == self.b
    }

    /// Largest `α` with `x + αg ∈ P`; the blocking index is the smallest
    /// minimizer of `x_j / -g_j` over `g_j < 0`.
    pub fn max_step(&self, x: &RationalVector, g: &ElementaryVector) -> Result<AugmentationResult> {
        self.max_step_along(x, g.direction())
    }

    /// [`max_step`](Self::max_step) for a raw kernel direction.
    pub fn max_step_along(&self, x: &RationalVector, g: &RationalVector) -> Result<AugmentationResult> {
        if x.len() != self.n() || g.len() != self.n() {
            return Err(Error::Dimension("point and direction must have length n".into()));
        }
        let mut best: Option<(Rational, usize)> = None;
        for j in (0..g.len()).filter(|&j| g[j].is_negative()) {
            if x[j].is_zero() {
                return Err(Error::ZeroStep { index: j });
            }
            let ratio = &x[j] / -&g[j];
            if best.as_ref().is_none_or(|(b, _)| ratio < *b) {
                best = Some((ratio, j));
            }
        }
        let (step_length, blocking_index) = best.ok_or(Error::Unbounded)?;
        let mut new_point = x.add_scaled(&step_length, g).into_inner();
        new_point[blocking_index] = Rational::zero();
        Ok(AugmentationResult { new_point: new_point.into(), step_length, blocking_index })
    }

    /// The basic solution for `basis` (any order, `m` indices).
    pub fn vertex_from_basis(&self, basis: &[usize]) -> Result<VertexWithBasis> {
        let mut basis = basis.to_vec();
        basis.sort_unstable();
        basis.dedup();
        if basis.len() != self.m() || basis.iter().any(|&j| j >= self.n()) {
            return Err(Error::Dimension(format!("a basis needs {} distinct column indices", self.m())));
        }
        let square = self.a.select_columns(&basis);
        if square.rank() < self.m() {
            return Err(Error::Infeasible);
        }
        let x_b = square.solve(&self.b)?;
        if !x_b.is_nonnegative() {
            return Err(Error::Infeasible);
        }
        Ok(VertexWithBasis { point: x_b.lift(self.n(), &basis), basis })
    }

    /// Extends `supp(x)` to a basis by adding the smallest-index columns
    /// that keep it independent.
    pub fn basis_from_vertex(&self, x: &RationalVector) -> Result<VertexWithBasis> {
        if !self.is_feasible(x) {
            return Err(Error::NotAVertex("point is infeasible".into()));
        }
        let mut basis = x.support();
        if self.a.rank_of_columns(&basis) < basis.len() {
            return Err(Error::NotAVertex(format!("support columns {basis:?} are dependent")));
        }
        for j in 0..self.n() {
            if basis.len() == self.m() {
                break;
            }
            if basis.contains(&j) {
                continue;
            }
            basis.push(j);
            if self.a.rank_of_columns(&basis) < basis.len() {
                basis.pop();
            }
        }
        basis.sort_unstable();
        Ok(VertexWithBasis { point: x.clone(), basis })
    }

    /// A basic feasible solution from Phase I of the simplex method.
    pub fn find_feasible_point(&self) -> Result<RationalVector> {
        Ok(Simplex::phase_one(self)?.point())
    }

    /// An optimal vertex of `min cᵀx` over `P` by the two-phase simplex
    /// method with Bland's rule.
    pub fn solve_lp(&self, c: &RationalVector) -> Result<VertexWithBasis> {
        if c.len() != self.n() {
            return Err(Error::Dimension(format!("objective of length {} for n = {}", c.len(), self.n())));
        }
        let mut simplex = Simplex::phase_one(self)?;
        simplex.optimize(c.entries())?;
        let point = simplex.point();
        let mut basis = simplex.basis.clone();
        basis.sort_unstable();
        Ok(VertexWithBasis { point, basis })
    }
}

/// A vertex together with a basis `B` (`|B| = m`, independent columns,
/// `supp(point) ⊆ B`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexWithBasis {
    pub point: RationalVector,
    pub basis: Vec<usize>,
}

impl VertexWithBasis {
    /// Checks every invariant against `p`.
    pub fn validate(&self, p: &PolyhedronInstance) -> Result<()> {
        let bad = |msg: String| Err(Error::TargetInvalid(msg));
        if !p.is_feasible(&self.point) {
            return bad("point is infeasible".into());
        }
        let mut sorted = self.basis.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != p.m() || sorted.iter().any(|&j| j >= p.n()) {
            return bad(format!("basis {:?} does not have {} distinct indices", self.basis, p.m()));
        }
        if p.a().rank_of_columns(&sorted) < p.m() {
            return bad(format!("basis columns {sorted:?} are dependent"));
        }
        if self.point.support().iter().any(|j| !sorted.contains(j)) {
            return bad("point is supported outside the basis".into());
        }
        Ok(())
    }

    /// `[n] ∖ B`
    pub fn nonbasic(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|j| !self.basis.contains(j)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AugmentationResult {
    pub new_point: RationalVector,
    pub step_length: Rational,
    pub blocking_index: usize,
}

/// Dense tableau `[B⁻¹A | B⁻¹b]` over the original columns plus one
/// artificial column per row.
struct Simplex {
    n: usize,
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
}

impl Simplex {
    fn width(&self) -> usize {
        self.n + self.rows.len()
    }

    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width()]
    }

    fn phase_one(p: &PolyhedronInstance) -> Result<Simplex> {
        let (m, n) = (p.m(), p.n());
        let rows = (0..m)
            .map(|i| {
                let flip = p.b()[i].is_negative();
                let sign = |v: &Rational| if flip { -v } else { v.clone() };
                let mut row: Vec<Rational> = p.a().row(i).iter().map(sign).collect();
                row.extend((0..m).map(|k| if k == i { Rational::from_integer(1.into()) } else { Rational::zero() }));
                row.push(sign(&p.b()[i]));
                row
            })
            .collect();
        let mut simplex = Simplex { n, rows, basis: (n..n + m).collect() };
        let cost: Vec<Rational> = (0..n + m)
            .map(|j| if j >= n { Rational::from_integer(1.into()) } else { Rational::zero() })
            .collect();
        simplex.run(&cost, n + m).map_err(|_| invariant("phase I objective is bounded below"))?;
        let infeasibility: Rational = (0..m).filter(|&i| simplex.basis[i] >= n).map(|i| simplex.rhs(i).clone()).sum();
        if infeasibility.is_positive() {
            return Err(Error::Empty);
        }
        for i in 0..m {
            if simplex.basis[i] < n {
                continue;
            }
            let col = (0..n)
                .find(|&j| !simplex.rows[i][j].is_zero())
                .ok_or_else(|| invariant("artificial row without original entries; A is rank deficient"))?;
            simplex.pivot(i, col);
        }
        Ok(simplex)
    }

    fn optimize(&mut self, c: &[Rational]) -> Result<()> {
        let cost: Vec<Rational> = c.iter().cloned().chain((0..self.rows.len()).map(|_| Rational::zero())).collect();
        let n = self.n;
        self.run(&cost, n)
    }

    /// Bland's rule over the first `allowed` columns.
    fn run(&mut self, cost: &[Rational], allowed: usize) -> Result<()> {
        loop {
            let entering = (0..allowed).filter(|j| !self.basis.contains(j)).find(|&j| {
                let reduced: Rational = &cost[j]
                    - (0..self.rows.len()).map(|i| &cost[self.basis[i]] * &self.rows[i][j]).sum::<Rational>();
                reduced.is_negative()
            });
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(Rational, usize)> = None;
            for i in 0..self.rows.len() {
                if !self.rows[i][col].is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / &self.rows[i][col];
                let better = match &leaving {
                    None => true,
                    Some((best, row)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*row]),
                };
                if better {
                    leaving = Some((ratio, i));
                }
            }
            let (_, row) = leaving.ok_or(Error::UnboundedLp)?;
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let factor = r[col].clone();
            for (v, p) in r.iter_mut().zip(&pivot_row) {
                *v -= &factor * p;
            }
        }
        self.basis[row] = col;
    }

    fn point(&self) -> RationalVector {
        let mut x = RationalVector::zeros(self.n).into_inner();
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                x[j] = self.rhs(i).clone();
            }
        }
        x.into()
    }
}
