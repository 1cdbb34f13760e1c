//! Exact rational scalars, vectors and dense matrices.
//!
//! Everything is computed over `BigRational`, which keeps values in lowest
//! terms with a positive denominator. Row reduction is plain Gauss-Jordan
//! elimination on fractions; the instances this crate targets are small
//! enough that fraction-free variants buy nothing.

use std::fmt;
use std::ops::{Deref, Index};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"p"` or `"p/q"` with decimal integers, an optional leading minus
/// on `p` and `q > 0`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("invalid rational literal {text:?}"));
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p, Some(q)),
        None => (text, None),
    };
    let digits = numer.strip_prefix('-').unwrap_or(numer);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let numer: BigInt = numer.parse().map_err(|_| bad())?;
    let denom: BigInt = match denom {
        Some(q) => {
            if q.is_empty() || !q.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            q.parse().map_err(|_| bad())?
        }
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

/// Serde adapter storing a rational as its `"p/q"` string.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVector(Vec<Rational>);

impl RationalVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        RationalVector(entries)
    }

    pub fn zeros(len: usize) -> Self {
        RationalVector(vec![Rational::zero(); len])
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        entries.iter().map(|&v| int(v)).collect()
    }

    /// Parses a comma separated list of rational literals, with optional
    /// surrounding parentheses or brackets.
    pub fn parse_list(text: &str) -> Result<Self> {
        let inner = text
            .trim()
            .trim_start_matches(['(', '['])
            .trim_end_matches([')', ']']);
        if inner.trim().is_empty() {
            return Ok(RationalVector::default());
        }
        inner.split(',').map(parse_rational).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| !self.0[i].is_zero()).collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|v| !v.is_negative())
    }

    pub fn dot(&self, other: &RationalVector) -> Rational {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// `self + alpha * other`
    pub fn add_scaled(&self, alpha: &Rational, other: &RationalVector) -> RationalVector {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a + alpha * b).collect()
    }

    pub fn add(&self, other: &RationalVector) -> RationalVector {
        self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()
    }

    pub fn sub(&self, other: &RationalVector) -> RationalVector {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    pub fn scale(&self, alpha: &Rational) -> RationalVector {
        self.0.iter().map(|a| a * alpha).collect()
    }

    pub fn neg(&self) -> RationalVector {
        self.0.iter().map(|a| -a).collect()
    }

    /// Entries at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> RationalVector {
        indices.iter().map(|&i| self.0[i].clone()).collect()
    }

    /// Inverse of `select`: places `self[k]` at position `indices[k]` of a
    /// zero vector of length `len`.
    pub fn lift(&self, len: usize, indices: &[usize]) -> RationalVector {
        let mut out = vec![Rational::zero(); len];
        for (value, &i) in self.0.iter().zip(indices) {
            out[i] = value.clone();
        }
        RationalVector(out)
    }

    /// Scales so that the first nonzero entry equals +1.
    pub fn canonical(&self) -> RationalVector {
        match self.0.iter().find(|v| !v.is_zero()) {
            Some(lead) => self.scale(&lead.recip()),
            None => self.clone(),
        }
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(ToString::to_string).collect()
    }

    pub fn from_strings(items: &[String]) -> Result<Self> {
        items.iter().map(|s| parse_rational(s)).collect()
    }
}

impl Deref for RationalVector {
    type Target = [Rational];

    fn deref(&self) -> &[Rational] {
        &self.0
    }
}

impl FromIterator<Rational> for RationalVector {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        RationalVector(iter.into_iter().collect())
    }
}

impl From<Vec<Rational>> for RationalVector {
    fn from(v: Vec<Rational>) -> Self {
        RationalVector(v)
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

impl Serialize for RationalVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        RationalVector::from_strings(&items).map_err(serde::de::Error::custom)
    }
}

/// Dense row-major matrix of rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("matrix must be nonempty, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(RationalMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let nrows = rows.len();
        RationalMatrix::new(nrows, cols, rows.into_iter().flatten().collect())
    }

    /// Test and fixture helper; panics on an empty matrix.
    pub fn from_i64<const C: usize>(rows: &[[i64; C]]) -> Self {
        let rows = rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        RationalMatrix::from_rows(rows).expect("nonempty integer matrix")
    }

    pub fn identity(size: usize) -> Self {
        let mut data = vec![Rational::zero(); size * size];
        for i in 0..size {
            data[i * size + i] = Rational::one();
        }
        RationalMatrix::new(size, size, data).expect("nonempty identity")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix::new(rows, cols, vec![Rational::zero(); rows * cols]).expect("nonempty")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> RationalVector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &RationalVector) -> RationalVector {
        assert_eq!(x.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `selfᵀ y`
    pub fn transpose_mul_vec(&self, y: &RationalVector) -> RationalVector {
        assert_eq!(y.len(), self.rows, "vector length must equal row count");
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j) * &y[i]).sum())
            .collect()
    }

    pub fn transpose(&self) -> RationalMatrix {
        let data = (0..self.cols)
            .flat_map(|j| (0..self.rows).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        RationalMatrix::new(self.cols, self.rows, data).expect("same size")
    }

    /// Submatrix on the given columns, in the given order. Panics if
    /// `columns` is empty.
    pub fn select_columns(&self, columns: &[usize]) -> RationalMatrix {
        let rows = (0..self.rows)
            .map(|i| columns.iter().map(|&j| self.get(i, j).clone()).collect())
            .collect();
        RationalMatrix::from_rows(rows).expect("nonempty column selection")
    }

    pub fn select_rows(&self, rows: &[usize]) -> RationalMatrix {
        RationalMatrix::from_rows(rows.iter().map(|&i| self.row(i).to_vec()).collect())
            .expect("nonempty row selection")
    }

    /// Reduced row echelon form and its pivot columns (increasing).
    pub fn rref(&self) -> (RationalMatrix, Vec<usize>) {
        let mut rows = self.to_rows();
        let pivots = reduce_rows(&mut rows, self.cols);
        let reduced = RationalMatrix::from_rows(rows).expect("same shape");
        (reduced, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rank_of_columns(&(0..self.cols).collect::<Vec<_>>())
    }

    /// Rank of the column submatrix; zero for an empty selection.
    pub fn rank_of_columns(&self, columns: &[usize]) -> usize {
        if columns.is_empty() {
            return 0;
        }
        let mut rows: Vec<Vec<Rational>> = (0..self.rows)
            .map(|i| columns.iter().map(|&j| self.get(i, j).clone()).collect())
            .collect();
        reduce_rows(&mut rows, columns.len()).len()
    }

    /// A basis of the right kernel: one vector per free column of the RREF,
    /// with a 1 in that column.
    pub fn kernel_basis(&self) -> Vec<RationalVector> {
        let (reduced, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|j| !pivots.contains(j)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -reduced.get(r, f);
                }
                RationalVector(v)
            })
            .collect()
    }

    /// One exact solution of `self · x = rhs` (free variables set to zero).
    pub fn solve(&self, rhs: &RationalVector) -> Result<RationalVector> {
        if rhs.len() != self.rows {
            return Err(Error::Dimension(format!(
                "rhs has length {}, matrix has {} rows",
                rhs.len(),
                self.rows
            )));
        }
        let mut rows: Vec<Vec<Rational>> = (0..self.rows)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.push(rhs[i].clone());
                r
            })
            .collect();
        let pivots = reduce_rows(&mut rows, self.cols);
        if rows[pivots.len()..].iter().any(|r| !r[self.cols].is_zero()) {
            return Err(Error::Infeasible);
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = rows[r][self.cols].clone();
        }
        Ok(RationalVector(x))
    }

    /// Keeps a maximal independent set of rows (earliest rows first) with
    /// the matching right-hand sides. Fails if a dropped row contradicts
    /// the kept ones.
    pub fn drop_dependent_rows(&self, rhs: &RationalVector) -> Result<(RationalMatrix, RationalVector)> {
        if rhs.len() != self.rows {
            return Err(Error::Dimension(format!(
                "rhs has length {}, matrix has {} rows",
                rhs.len(),
                self.rows
            )));
        }
        self.solve(rhs)?;
        // Row rank of a prefix equals the column rank of the transposed prefix.
        let transposed = self.transpose();
        let mut kept: Vec<usize> = Vec::new();
        for i in 0..self.rows {
            let mut candidate = kept.clone();
            candidate.push(i);
            if transposed.rank_of_columns(&candidate) == candidate.len() {
                kept = candidate;
            }
        }
        Ok((self.select_rows(&kept), rhs.select(&kept)))
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        self.get(i, j)
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Gauss-Jordan elimination pivoting only in the first `pivot_cols`
/// columns; row operations act on whole rows so an augmented column rides
/// along. Returns the pivot columns.
fn reduce_rows(rows: &mut [Vec<Rational>], pivot_cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut().skip(c) {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                *v -= &factor * p;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}
