//! Positive definite integral quadratic forms, their minimal vectors, and the
//! unimodular action on symmetric matrices.
//!
//! Symmetric `n×n` matrices are flattened to the upper triangle in row order
//! (`(0,0), (0,1), …, (0,n-1), (1,1), …`) without doubling off-diagonal
//! entries. The trace pairing is computed explicitly by [`trace_pairing`].

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{canonical_sign, GroupElement};
use crate::linalg::{rank_int, IntMat, RatMat, Sign};

/// Dimension of the space of symmetric `n×n` matrices.
pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Flattened coordinate of entry `(i, j)`, `i ≤ j`.
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

pub fn flatten_sym(m: &IntMat) -> Vec<BigInt> {
    let n = m.rows();
    let mut out = Vec::with_capacity(sym_dim(n));
    for i in 0..n {
        for j in i..n {
            out.push(m.get(i, j).clone());
        }
    }
    out
}

pub fn unflatten_sym(n: usize, v: &[BigInt]) -> IntMat {
    let mut m = IntMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = v[sym_index(n, i, j)].clone();
            m.set(i, j, x.clone());
            m.set(j, i, x);
        }
    }
    m
}

/// `x xᵀ`.
pub fn rank_one(x: &[i64]) -> Result<IntMat> {
    if x.iter().all(|&c| c == 0) {
        return Err(Error::ZeroVector);
    }
    let rows: Vec<Vec<BigInt>> = x.iter().map(|&a| x.iter().map(|&b| BigInt::from(a) * b).collect()).collect();
    Ok(IntMat::from_rows(rows))
}

/// Flattened `x xᵀ`, without the zero check.
pub fn rank_one_flat(x: &[i64]) -> Vec<BigInt> {
    let n = x.len();
    let mut out = Vec::with_capacity(sym_dim(n));
    for i in 0..n {
        for j in i..n {
            out.push(BigInt::from(x[i]) * x[j]);
        }
    }
    out
}

/// Coefficients `c` with `x·N·x = c · flatten(N)` for every symmetric `N`.
pub fn pairing_row(x: &[i64]) -> Vec<BigInt> {
    let n = x.len();
    let mut out = Vec::with_capacity(sym_dim(n));
    for i in 0..n {
        for j in i..n {
            let f = if i == j { 1 } else { 2 };
            out.push(BigInt::from(x[i]) * x[j] * f);
        }
    }
    out
}

/// `tr(AB)` for symmetric `A`, `B`.
pub fn trace_pairing(a: &IntMat, b: &IntMat) -> BigInt {
    let n = a.rows();
    let mut s = BigInt::zero();
    for i in 0..n {
        for j in 0..n {
            s += a.get(i, j) * b.get(j, i);
        }
    }
    s
}

/// `xᵀ Q x`.
pub fn eval(q: &IntMat, x: &[i64]) -> BigInt {
    bilinear(q, x, x)
}

/// `xᵀ Q y`.
pub fn bilinear(q: &IntMat, x: &[i64], y: &[i64]) -> BigInt {
    let mut s = BigInt::zero();
    for (i, &xi) in x.iter().enumerate().filter(|&(_, &xi)| xi != 0) {
        let mut t = BigInt::zero();
        for (j, &yj) in y.iter().enumerate().filter(|&(_, &yj)| yj != 0) {
            t += q.get(i, j) * yj;
        }
        s += t * xi;
    }
    s
}

/// Contragredient action on forms: `g·Q = g⁻ᵀ Q g⁻¹`.
pub fn act(g: &GroupElement, q: &IntMat) -> IntMat {
    let gi = g.inverse().to_intmat();
    gi.transpose().mul(q).mul(&gi)
}

/// Action on rays and other points of the dual cone: `g·X = g X gᵀ`.
pub fn act_on_ray(g: &GroupElement, x: &IntMat) -> IntMat {
    let gm = g.to_intmat();
    gm.mul(x).mul(&gm.transpose())
}

/// Matrix of `X ↦ g X gᵀ` in flattened coordinates (columns = images of the basis).
pub fn ambient_action_matrix(g: &GroupElement) -> IntMat {
    let n = g.n();
    let d = sym_dim(n);
    let mut m = IntMat::zeros(d, d);
    for i in 0..n {
        for j in i..n {
            let mut e = IntMat::zeros(n, n);
            e.set(i, j, BigInt::one());
            e.set(j, i, BigInt::one());
            let img = flatten_sym(&act_on_ray(g, &e));
            let col = sym_index(n, i, j);
            for (r, v) in img.into_iter().enumerate() {
                m.set(r, col, v);
            }
        }
    }
    m
}

/// Whether `X ↦ g X gᵀ` preserves the orientation of the space of symmetric matrices.
pub fn ambient_orientation_sign(g: &GroupElement) -> Sign {
    Sign::of(&ambient_action_matrix(g).det())
}

/// A positive definite integral form up to homothety, stored with coprime entries.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "IntMat", into = "IntMat")]
pub struct QForm {
    gram: IntMat,
}

impl TryFrom<IntMat> for QForm {
    type Error = Error;
    fn try_from(m: IntMat) -> Result<Self> {
        QForm::new(m)
    }
}

impl From<QForm> for IntMat {
    fn from(q: QForm) -> Self {
        q.gram
    }
}

impl QForm {
    /// Normalizes to coprime entries; fails unless symmetric positive definite.
    pub fn new(gram: IntMat) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::DimensionMismatch("gram matrix must be square".into()));
        }
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if !is_positive_definite(&gram) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(QForm { gram: gram.primitive() })
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        QForm::new(IntMat::from_i64_rows(rows))
    }

    /// Root lattice A_n: 2 on the diagonal, −1 next to it.
    pub fn a_n(n: usize) -> Self {
        let mut g = IntMat::zeros(n, n);
        for i in 0..n {
            g.set(i, i, BigInt::from(2));
            if i + 1 < n {
                g.set(i, i + 1, BigInt::from(-1));
                g.set(i + 1, i, BigInt::from(-1));
            }
        }
        QForm::new(g).expect("A_n is positive definite")
    }

    /// Root lattice D_n (n ≥ 3) in the basis e₁−e₂, …, e_{n−1}−e_n, e_{n−1}+e_n.
    pub fn d_n(n: usize) -> Self {
        assert!(n >= 3, "D_n needs n >= 3");
        let basis: Vec<Vec<i64>> = (0..n)
            .map(|k| {
                let mut v = vec![0i64; n];
                if k + 1 < n {
                    v[k] = 1;
                    v[k + 1] = -1;
                } else {
                    v[n - 2] = 1;
                    v[n - 1] = 1;
                }
                v
            })
            .collect();
        let rows: Vec<Vec<i64>> =
            basis.iter().map(|a| basis.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect()).collect();
        QForm::from_i64_rows(&rows).expect("D_n is positive definite")
    }

    pub fn n(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &IntMat {
        &self.gram
    }

    pub fn eval(&self, x: &[i64]) -> BigInt {
        eval(&self.gram, x)
    }

    pub fn act(&self, g: &GroupElement) -> QForm {
        QForm { gram: act(g, &self.gram).primitive() }
    }

    /// `B Q Bᵀ` for a unimodular `B`: the Gram matrix in the basis given by the rows of `B`.
    pub fn rebase(&self, b: &GroupElement) -> QForm {
        let bm = b.to_intmat();
        QForm { gram: bm.mul(&self.gram).mul(&bm.transpose()).primitive() }
    }
}

impl fmt::Debug for QForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QForm({})", self.gram)
    }
}

impl fmt::Display for QForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gram)
    }
}

/// `Q = L D Lᵀ` with `L` unit lower triangular; `None` if some pivot vanishes.
///
/// Returns `(d, l)` with `l[i][k] = L_ik`.
pub fn ldl(q: &RatMat) -> Option<(Vec<BigRational>, Vec<Vec<BigRational>>)> {
    let n = q.rows();
    let mut d: Vec<BigRational> = Vec::with_capacity(n);
    let mut l = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        l[i][i] = BigRational::one();
        let mut di = q.get(i, i).clone();
        for k in 0..i {
            di -= &l[i][k] * &l[i][k] * &d[k];
        }
        if di.is_zero() {
            return None;
        }
        for j in i + 1..n {
            let mut s = q.get(j, i).clone();
            for k in 0..i {
                s -= &l[j][k] * &l[i][k] * &d[k];
            }
            l[j][i] = s / &di;
        }
        d.push(di);
    }
    Some((d, l))
}

pub fn is_positive_definite(q: &IntMat) -> bool {
    q.is_square() && q.is_symmetric() && ldl(&RatMat::from(q)).is_some_and(|(d, _)| d.iter().all(|x| x.is_positive()))
}

/// All `x ≠ 0` (one per ± pair, first nonzero coordinate positive) with
/// `xᵀ Q x ≤ bound` (or `< bound` when `strict`), paired with their values.
///
/// Fincke–Pohst enumeration over the exact `LDLᵀ` decomposition; complete.
pub fn short_vectors(q: &RatMat, bound: &BigRational, strict: bool) -> Result<Vec<(Vec<i64>, BigRational)>> {
    let n = q.rows();
    let (d, l) = ldl(q).ok_or(Error::NotPositiveDefinite)?;
    if d.iter().any(|x| !x.is_positive()) {
        return Err(Error::NotPositiveDefinite);
    }
    let mut out = Vec::new();
    if n == 0 || bound.is_negative() {
        return Ok(out);
    }
    let mut x = vec![0i64; n];
    let mut ctx = Enum { d: &d, l: &l, bound, strict, out: &mut out };
    ctx.level(n - 1, bound.clone(), true, &mut x)?;
    out.sort();
    Ok(out)
}

struct Enum<'a> {
    d: &'a [BigRational],
    l: &'a [Vec<BigRational>],
    bound: &'a BigRational,
    strict: bool,
    out: &'a mut Vec<(Vec<i64>, BigRational)>,
}

impl Enum<'_> {
    // q(x) = Σ_k d_k (x_k + Σ_{i>k} L_ik x_i)²; coordinates are fixed from the last one down.
    fn level(&mut self, k: usize, rem: BigRational, zero_above: bool, x: &mut [i64]) -> Result<()> {
        let mut c = BigRational::zero();
        for (li, &xi) in self.l.iter().zip(x.iter()).skip(k + 1) {
            if xi != 0 {
                c -= &li[k] * BigRational::from_integer(BigInt::from(xi));
            }
        }
        let to_i64 = |r: &BigRational| r.to_integer().to_i64().ok_or_else(|| Error::Overflow(r.to_string()));
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let start = to_i64(&(&c + &half).floor())?;
        // Visit t = start, start+1, start-1, start+2, ... in both directions until out of range.
        let visit = |t: i64, x: &mut [i64], this: &mut Self| -> Result<bool> {
            if zero_above && t < 0 {
                return Ok(false);
            }
            let diff = BigRational::from_integer(BigInt::from(t)) - &c;
            let used = &this.d[k] * &diff * &diff;
            if used > rem {
                return Ok(false);
            }
            let left = &rem - &used;
            x[k] = t;
            if k == 0 {
                if !(zero_above && t == 0) {
                    let value = this.bound - &left;
                    if !(this.strict && value == *this.bound) {
                        this.out.push((x.to_vec(), value));
                    }
                }
            } else {
                this.level(k - 1, left, zero_above && t == 0, x)?;
            }
            x[k] = 0;
            Ok(true)
        };
        let mut up = start;
        while visit(up, x, self)? {
            up += 1;
        }
        let mut down = start - 1;
        while visit(down, x, self)? {
            down -= 1;
        }
        Ok(())
    }
}

/// Minimum of a form and its minimal vectors (one per ± pair).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinVecSet {
    pub vectors: Vec<Vec<i64>>,
    #[serde(with = "crate::serde_util::rational")]
    pub min_value: BigRational,
}

impl MinVecSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn n(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }
}

pub fn minimum_and_minimal_vectors(h: &QForm) -> Result<MinVecSet> {
    let q = RatMat::from(h.gram());
    let n = h.n();
    // Some basis vector attains the minimal diagonal entry, so this bound covers μ.
    let bound = (0..n).map(|i| h.gram().get(i, i).clone()).min().unwrap_or_default();
    let found = short_vectors(&q, &BigRational::from_integer(bound), false)?;
    let Some(min_value) = found.iter().map(|(_, v)| v.clone()).min() else {
        return Ok(MinVecSet { vectors: Vec::new(), min_value: BigRational::zero() });
    };
    let mut vectors: Vec<Vec<i64>> =
        found.into_iter().filter(|(_, v)| *v == min_value).map(|(x, _)| canonical_sign(&x)).collect();
    vectors.sort();
    Ok(MinVecSet { vectors, min_value })
}

/// Whether the rank-one matrices of the minimal vectors span the space of symmetric matrices.
pub fn is_perfect(m: &MinVecSet) -> bool {
    let n = m.n();
    if n == 0 {
        return false;
    }
    let rows: Vec<Vec<BigInt>> = m.vectors.iter().map(|x| rank_one_flat(x)).collect();
    rank_int(&rows, sym_dim(n)) == sym_dim(n)
}

/// Dimension of the solutions `(Q, μ)` of `xᵀQx = μ` over all `x ∈ m`.
///
/// Equal to 1 exactly when `m` determines a form up to scale.
pub fn reconstruction_dimension(m: &MinVecSet) -> usize {
    let n = m.n();
    let d = sym_dim(n);
    let rows: Vec<Vec<BigInt>> = m
        .vectors
        .iter()
        .map(|x| {
            let mut r = pairing_row(x);
            r.push(BigInt::from(-1));
            r
        })
        .collect();
    d + 1 - rank_int(&rows, d + 1)
}

/// Sign of `xᵀ N x`.
pub fn eval_sign(q: &IntMat, x: &[i64]) -> Sign {
    Sign::of(&eval(q, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_min_vectors(h: &QForm, r: i64) -> (BigInt, Vec<Vec<i64>>) {
        let n = h.n();
        let mut best: Option<BigInt> = None;
        let mut vecs = Vec::new();
        let total = (2 * r + 1).pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let x: Vec<i64> = (0..n)
                .map(|_| {
                    let v = c % (2 * r + 1) - r;
                    c /= 2 * r + 1;
                    v
                })
                .collect();
            if x.iter().all(|&v| v == 0) || canonical_sign(&x) != x {
                continue;
            }
            let v = h.eval(&x);
            match &best {
                Some(b) if v > *b => {}
                Some(b) if v == *b => vecs.push(x),
                _ => {
                    best = Some(v);
                    vecs = vec![x];
                }
            }
        }
        vecs.sort();
        (best.unwrap(), vecs)
    }

    #[test]
    fn identity_form() {
        let m = minimum_and_minimal_vectors(&QForm::from_i64_rows(&[[1, 0], [0, 1]]).unwrap()).unwrap();
        assert_eq!(m.min_value, BigRational::one());
        assert_eq!(m.vectors, vec![vec![0, 1], vec![1, 0]]);
        assert!(!is_perfect(&m));
    }

    #[test]
    fn a2_gram_minimal_vectors() {
        // [[2,-1],[-1,2]] is minimal on e1, e2, e1+e2; the sign-flipped Gram on e1, e2, e1-e2.
        let m = minimum_and_minimal_vectors(&QForm::a_n(2)).unwrap();
        assert_eq!(m.min_value, BigRational::from_integer(2.into()));
        assert_eq!(m.vectors, vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        let m2 = minimum_and_minimal_vectors(&QForm::from_i64_rows(&[[2, 1], [1, 2]]).unwrap()).unwrap();
        assert_eq!(m2.vectors, vec![vec![0, 1], vec![1, -1], vec![1, 0]]);
        assert!(is_perfect(&m) && is_perfect(&m2));
    }

    #[test]
    fn a3_against_brute_force() {
        let h = QForm::a_n(3);
        let m = minimum_and_minimal_vectors(&h).unwrap();
        let (mu, vecs) = brute_min_vectors(&h, 2);
        assert_eq!(m.min_value, BigRational::from_integer(mu));
        assert_eq!(m.vectors, vecs);
        assert_eq!(m.len(), 6);
        assert!(is_perfect(&m));
    }

    #[test]
    fn root_lattice_counts() {
        let counts = [(QForm::a_n(4), 10), (QForm::d_n(4), 12), (QForm::a_n(5), 15), (QForm::d_n(5), 20)];
        for (h, c) in counts {
            let m = minimum_and_minimal_vectors(&h).unwrap();
            assert_eq!(m.len(), c, "{h:?}");
            assert!(is_perfect(&m));
            let (_, vecs) = brute_min_vectors(&h, 2);
            assert_eq!(m.vectors, vecs);
        }
    }

    #[test]
    fn rejects_indefinite() {
        assert!(matches!(QForm::from_i64_rows(&[[1, 2], [2, 1]]), Err(Error::NotPositiveDefinite)));
        assert!(matches!(QForm::from_i64_rows(&[[1, 2], [0, 1]]), Err(Error::NotSymmetric)));
    }

    #[test]
    fn normalization_divides_content() {
        let h = QForm::from_i64_rows(&[[4, -2], [-2, 4]]).unwrap();
        assert_eq!(h, QForm::a_n(2));
    }

    #[test]
    fn rank_one_examples() {
        assert_eq!(rank_one(&[1, 0]).unwrap(), IntMat::from_i64_rows(&[[1, 0], [0, 0]]));
        assert_eq!(rank_one(&[1, -1]).unwrap(), IntMat::from_i64_rows(&[[1, -1], [-1, 1]]));
        assert_eq!(rank_one(&[-2, 3]).unwrap(), rank_one(&[2, -3]).unwrap());
        assert!(matches!(rank_one(&[0, 0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn act_examples() {
        let g = GroupElement::from_rows(&[[1, 0], [0, -1]]).unwrap();
        let x = rank_one(&[1, -1]).unwrap();
        assert_eq!(act(&g, &x), rank_one(&[1, 1]).unwrap());
        assert_eq!(act(&GroupElement::identity(2), &x), x);
        let u = GroupElement::from_rows(&[[2, 1], [1, 1]]).unwrap();
        let q = QForm::a_n(2).gram().clone();
        assert_eq!(act(&u, &act(&u.inverse(), &q)), q);
    }

    #[test]
    fn reconstruction() {
        let a2 = minimum_and_minimal_vectors(&QForm::a_n(2)).unwrap();
        let a3 = minimum_and_minimal_vectors(&QForm::a_n(3)).unwrap();
        let i2 = minimum_and_minimal_vectors(&QForm::from_i64_rows(&[[1, 0], [0, 1]]).unwrap()).unwrap();
        assert_eq!(reconstruction_dimension(&a2), 1);
        assert_eq!(reconstruction_dimension(&a3), 1);
        assert!(reconstruction_dimension(&i2) > 1);
    }

    #[test]
    fn short_vectors_strict() {
        let q = RatMat::from(QForm::a_n(2).gram());
        let two = BigRational::from_integer(2.into());
        assert!(short_vectors(&q, &two, true).unwrap().is_empty());
        assert_eq!(short_vectors(&q, &two, false).unwrap().len(), 3);
    }

    #[test]
    fn sym_index_matches_flatten() {
        let n = 4;
        let m = IntMat::from_i64_rows(&[[1, 2, 3, 4], [2, 5, 6, 7], [3, 6, 8, 9], [4, 7, 9, 10]]);
        let f = flatten_sym(&m);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(&f[sym_index(n, i, j)], m.get(i, j));
            }
        }
        assert_eq!(unflatten_sym(n, &f), m);
    }

    #[test]
    fn serde_round_trip() {
        let h = QForm::a_n(3);
        let s = serde_json::to_string(&h).unwrap();
        assert!(s.starts_with("[[\"2\""));
        assert_eq!(serde_json::from_str::<QForm>(&s).unwrap(), h);
        assert!(serde_json::from_str::<QForm>("[[\"1\",\"2\"],[\"2\",\"1\"]]").is_err());
    }
}
