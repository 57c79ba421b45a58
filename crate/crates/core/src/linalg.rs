//! Exact integer and rational linear algebra.
//!
//! Everything here is fraction-free Bareiss elimination over [`BigInt`];
//! rational inputs are reduced to integer rows by clearing each row's
//! denominators, which changes neither rank, kernel nor the sign of a
//! determinant.

use std::fmt;
use std::ops::{Mul, Neg};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sign in {-1, 0, +1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of(x: &BigInt) -> Sign {
        if x.is_positive() {
            Sign::Pos
        } else if x.is_negative() {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn of_i64(x: i64) -> Sign {
        match x.signum() {
            1 => Sign::Pos,
            -1 => Sign::Neg,
            _ => Sign::Zero,
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Sign::Zero
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        match (self, rhs) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Pos,
            _ => Sign::Neg,
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// Dense arbitrary-precision integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend(row);
        }
        IntMat { rows: r, cols: c, data }
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        IntMat::from_rows(rows.iter().map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    /// A matrix with `cols` columns and no rows still knows its width.
    pub fn from_rows_with_cols(rows: Vec<Vec<BigInt>>, cols: usize) -> Self {
        if rows.is_empty() {
            return IntMat::zeros(0, cols);
        }
        IntMat::from_rows(rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    /// gcd of all entries (0 for the zero matrix).
    pub fn content(&self) -> BigInt {
        self.data.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }

    /// Divide out the content; the zero matrix is returned unchanged.
    pub fn primitive(&self) -> IntMat {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        IntMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x / &g).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> IntMat {
        IntMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * k).collect() }
    }

    pub fn add(&self, other: &IntMat) -> IntMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        rank_int(&self.to_rows(), self.cols)
    }

    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        det_int(self.to_rows())
    }

    /// Adjugate (classical adjoint) of a square matrix: adj(M)·M = det(M)·I.
    pub fn adjugate(&self) -> IntMat {
        assert!(self.is_square());
        let n = self.rows;
        if n == 1 {
            return IntMat::identity(1);
        }
        let mut adj = IntMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let minor: Vec<Vec<BigInt>> = (0..n)
                    .filter(|&r| r != j)
                    .map(|r| (0..n).filter(|&c| c != i).map(|c| self.get(r, c).clone()).collect())
                    .collect();
                let mut d = det_int(minor);
                if (i + j) % 2 == 1 {
                    d = -d;
                }
                adj.set(i, j, d);
            }
        }
        adj
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// Serialized as a list of rows of decimal strings.
impl Serialize for IntMat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> =
            (0..self.rows).map(|i| self.row(i).iter().map(ToString::to_string).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<String>> = Vec::deserialize(d)?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|x| x.parse::<BigInt>()).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Ok(IntMat::from_rows_with_cols(rows, cols))
    }
}

/// Dense rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend(row);
        }
        RatMat { rows: r, cols: c, data }
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        RatMat::from(&IntMat::from_i64_rows(rows))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> RatMat {
        let mut t = RatMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(v).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)).collect()
    }

    /// Rows rescaled by their positive denominator lcm; same rank, kernel and determinant sign.
    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| clear_denominators(self.row(i))).collect()
    }
}

impl From<&IntMat> for RatMat {
    fn from(m: &IntMat) -> Self {
        RatMat {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|x| BigRational::from_integer(x.clone())).collect(),
        }
    }
}

/// Rational vector; constructors keep entries in lowest terms (as `BigRational` always does).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatVec(pub Vec<BigRational>);

impl RatVec {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn from_ints(v: &[BigInt]) -> Self {
        RatVec(v.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Multiply through by the denominators and divide by the content.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        primitive_vec(&clear_denominators(&self.0))
    }
}

/// Multiply a rational row by the lcm of its denominators.
pub fn clear_denominators(row: &[BigRational]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
}

pub fn primitive_vec(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

/// In-place fraction-free row echelon form.
///
/// Returns the pivot columns and the parity of the row swaps performed
/// (`true` = odd). Every intermediate entry is a minor of the input, so the
/// divisions by the previous pivot are exact.
fn bareiss_echelon(m: &mut [Vec<BigInt>], cols: usize) -> (Vec<usize>, bool) {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut odd = false;
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            m.swap(p, r);
            odd = !odd;
        }
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            let lead = row[c].clone();
            for j in c + 1..cols {
                let v = &pivot_row[c] * &row[j] - &lead * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    (pivots, odd)
}

pub fn rank_int(rows: &[Vec<BigInt>], cols: usize) -> usize {
    let mut m = rows.to_vec();
    bareiss_echelon(&mut m, cols).0.len()
}

/// Determinant of a square integer matrix given by rows.
pub fn det_int(mut rows: Vec<Vec<BigInt>>) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::one();
    }
    let (pivots, odd) = bareiss_echelon(&mut rows, n);
    if pivots.len() < n {
        return BigInt::zero();
    }
    let d = rows[n - 1][n - 1].clone();
    if odd {
        -d
    } else {
        d
    }
}

pub fn det_sign_int(rows: Vec<Vec<BigInt>>) -> Sign {
    Sign::of(&det_int(rows))
}

/// Right kernel of an integer matrix given by rows; each basis vector is a
/// primitive integer vector.
pub fn kernel_int(rows: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    let mut m = rows.to_vec();
    let (pivots, _) = bareiss_echelon(&mut m, cols);
    let is_pivot: Vec<bool> = (0..cols).map(|c| pivots.contains(&c)).collect();
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![BigRational::zero(); cols];
        x[free] = BigRational::one();
        for (r, &pc) in pivots.iter().enumerate().rev() {
            let mut s = BigRational::zero();
            for j in pc + 1..cols {
                if !m[r][j].is_zero() && !x[j].is_zero() {
                    s += &x[j] * BigRational::from_integer(m[r][j].clone());
                }
            }
            x[pc] = -s / BigRational::from_integer(m[r][pc].clone());
        }
        basis.push(primitive_vec(&clear_denominators(&x)));
    }
    basis
}

/// Rank over Q.
pub fn rank(m: &RatMat) -> usize {
    rank_int(&m.integer_rows(), m.cols)
}

/// Basis of the right kernel over Q; vectors are primitive integer vectors.
pub fn kernel_basis(m: &RatMat) -> Vec<RatVec> {
    kernel_int(&m.integer_rows(), m.cols).iter().map(|v| RatVec::from_ints(v)).collect()
}

/// Sign of the determinant of a square rational matrix.
pub fn det_sign(m: &RatMat) -> Result<Sign> {
    if m.rows != m.cols {
        return Err(Error::DimensionMismatch(format!("determinant of a {}x{} matrix", m.rows, m.cols)));
    }
    Ok(det_sign_int(m.integer_rows()))
}

/// Sign of the change-of-basis determinant taking the ordered basis `b1` to
/// the ordered basis `b2` of the same subspace. Vectors are rows.
pub fn relative_orientation(b1: &[Vec<BigInt>], b2: &[Vec<BigInt>]) -> Result<Sign> {
    let k = b1.len();
    let dim = b1.first().map_or(0, Vec::len);
    if b2.len() != k || b2.iter().chain(b1).any(|v| v.len() != dim) {
        return Err(Error::SpanMismatch("bases of different shapes".into()));
    }
    if rank_int(b1, dim) != k || rank_int(b2, dim) != k {
        return Err(Error::SpanMismatch("input is not a basis".into()));
    }
    let both: Vec<Vec<BigInt>> = b1.iter().chain(b2).cloned().collect();
    if rank_int(&both, dim) != k {
        return Err(Error::SpanMismatch("the two bases span different subspaces".into()));
    }
    // Restrict to k coordinates on which b1 is independent; b2 = C·b1 there too.
    let pivots = independent_columns(b1, dim);
    let restrict = |b: &[Vec<BigInt>]| -> Vec<Vec<BigInt>> {
        b.iter().map(|v| pivots.iter().map(|&c| v[c].clone()).collect()).collect()
    };
    Ok(det_sign_int(restrict(b2)) * det_sign_int(restrict(b1)))
}

/// Column indices of a maximal set of independent columns (the echelon pivots).
pub fn independent_columns(rows: &[Vec<BigInt>], cols: usize) -> Vec<usize> {
    let mut m = rows.to_vec();
    bareiss_echelon(&mut m, cols).0
}

/// Indices of a maximal linearly independent subset of `vectors`, chosen greedily in order.
pub fn independent_subset(vectors: &[Vec<BigInt>], dim: usize) -> Vec<usize> {
    // Columns of the transpose that are pivots = greedy independent vectors.
    let t: Vec<Vec<BigInt>> = (0..dim).map(|c| vectors.iter().map(|v| v[c].clone()).collect()).collect();
    independent_columns(&t, vectors.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&RatMat::from_i64_rows(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]])), 3);
        assert_eq!(rank(&RatMat::zeros(2, 5)), 0);
        // xx^T for e1, e2, e1 - e2 in upper-triangle coordinates (11, 12, 22).
        assert_eq!(rank(&RatMat::from_i64_rows(&[[1, 0, 0], [0, 0, 1], [1, -1, 1]])), 3);
    }

    #[test]
    fn rank_of_rational_rows() {
        let half = BigRational::new(1.into(), 2.into());
        let m = RatMat::from_rows(vec![
            vec![half.clone(), BigRational::one()],
            vec![BigRational::one(), BigRational::from_integer(2.into())],
        ]);
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&RatMat::from_i64_rows(&[[1, 0], [0, 1]])).is_empty());
        assert_eq!(kernel_basis(&RatMat::zeros(1, 3)).len(), 3);
        let k = kernel_basis(&RatMat::from_i64_rows(&[[1, -1]]));
        assert_eq!(k, vec![RatVec::from_ints(&[BigInt::from(1), BigInt::from(1)])]);
    }

    #[test]
    fn kernel_with_skipped_pivot_columns() {
        let rows = ints(&[&[0, 2, 4, 1], &[0, 1, 2, 1], &[0, 3, 6, 2]]);
        let k = kernel_int(&rows, 4);
        assert_eq!(k.len(), 2);
        for v in &k {
            for r in &rows {
                assert!(dot(r, v).is_zero());
            }
        }
    }

    #[test]
    fn det_sign_examples() {
        assert_eq!(det_sign(&RatMat::from_i64_rows(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]])).unwrap(), Sign::Pos);
        assert_eq!(det_sign(&RatMat::from_i64_rows(&[[0, 1, 0], [1, 0, 0], [0, 0, 1]])).unwrap(), Sign::Neg);
        assert_eq!(det_sign(&RatMat::from_i64_rows(&[[2, 0, 0], [0, 3, 0], [0, 0, -5]])).unwrap(), Sign::Neg);
        assert!(det_sign(&RatMat::zeros(2, 3)).is_err());
    }

    #[test]
    fn relative_orientation_examples() {
        let b1 = ints(&[&[1, 0], &[0, 1]]);
        assert_eq!(relative_orientation(&b1, &b1).unwrap(), Sign::Pos);
        let swapped = ints(&[&[0, 1], &[1, 0]]);
        assert_eq!(relative_orientation(&b1, &swapped).unwrap(), Sign::Neg);
        let b2 = ints(&[&[1, 1], &[0, 1]]);
        assert_eq!(relative_orientation(&b1, &b2).unwrap(), Sign::Pos);
    }

    #[test]
    fn relative_orientation_in_a_proper_subspace() {
        let b1 = ints(&[&[1, 0, 1], &[0, 1, 1]]);
        let b2 = ints(&[&[0, 1, 1], &[1, 1, 2]]);
        assert_eq!(relative_orientation(&b1, &b2).unwrap(), Sign::Neg);
        let other = ints(&[&[1, 0, 0], &[0, 1, 0]]);
        assert!(matches!(relative_orientation(&b1, &other), Err(Error::SpanMismatch(_))));
    }

    #[test]
    fn adjugate_identity() {
        let m = IntMat::from_i64_rows(&[[2, 1, 0], [1, 3, 1], [0, 1, 4]]);
        let prod = m.adjugate().mul(&m);
        assert_eq!(prod, IntMat::identity(3).scale(&m.det()));
    }

    #[test]
    fn independent_subset_is_greedy() {
        let v = ints(&[&[1, 0, 0], &[2, 0, 0], &[0, 1, 0], &[1, 1, 0], &[0, 0, 1]]);
        assert_eq!(independent_subset(&v, 3), vec![0, 2, 4]);
    }
}
