//! Voronoi domains as polyhedral cones in the space of symmetric matrices.
//!
//! A cone is spanned by the rank-one matrices `x xᵀ` of a set of lattice
//! vectors. Facets are computed by the double description method applied to
//! the dual cone `{N : xᵀ N x ≥ 0 for every ray}`, whose extreme rays are the
//! inward facet normals.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{eval, pairing_row, rank_one_flat, sym_dim, unflatten_sym, MinVecSet};
use crate::linalg::{dot, kernel_int, primitive_vec, rank_int, IntMat};

/// A set of ray indices (at most 128 rays per cone).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct RaySet(pub u128);

impl RaySet {
    pub fn full(m: usize) -> Self {
        if m == 128 {
            RaySet(u128::MAX)
        } else {
            RaySet((1u128 << m) - 1)
        }
    }

    pub fn single(i: usize) -> Self {
        RaySet(1u128 << i)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u128 << i;
    }

    pub fn is_subset(self, other: RaySet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(self, other: RaySet) -> RaySet {
        RaySet(self.0 & other.0)
    }

    pub fn minus(self, other: RaySet) -> RaySet {
        RaySet(self.0 & !other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }
}

impl FromIterator<usize> for RaySet {
    fn from_iter<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut s = RaySet::default();
        for i in it {
            s.insert(i);
        }
        s
    }
}

impl From<Vec<usize>> for RaySet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl From<RaySet> for Vec<usize> {
    fn from(s: RaySet) -> Self {
        s.iter().collect()
    }
}

impl fmt::Debug for RaySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A facet: its primitive inward normal and the rays lying on it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FacetRec {
    pub normal: IntMat,
    pub incident: RaySet,
}

#[derive(Clone, Debug)]
pub struct PolyCone {
    n: usize,
    vectors: Vec<Vec<i64>>,
    rays: Vec<Vec<BigInt>>,
    facets: OnceLock<Vec<FacetRec>>,
}

impl PartialEq for PolyCone {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.vectors == other.vectors
    }
}

impl Eq for PolyCone {}

impl PolyCone {
    /// The cone spanned by `x xᵀ` over the given vectors (one per ± pair).
    ///
    /// Checks full dimension and that every ray is extreme; computes facets.
    pub fn build(m: &MinVecSet) -> Result<Self> {
        PolyCone::from_vectors(m.vectors.clone())
    }

    pub fn from_vectors(vectors: Vec<Vec<i64>>) -> Result<Self> {
        let cone = PolyCone::unchecked(vectors)?;
        let d = cone.ambient_dim();
        let rank = rank_int(&cone.rays, d);
        if rank < d {
            return Err(Error::NotFullDim { rank, ambient: d });
        }
        cone.check_extreme()?;
        Ok(cone)
    }

    /// Rebuild from stored data; the facets are taken on trust if supplied.
    pub fn with_facets(vectors: Vec<Vec<i64>>, facets: Vec<FacetRec>) -> Result<Self> {
        let cone = PolyCone::unchecked(vectors)?;
        cone.facets.set(facets).expect("fresh cell");
        Ok(cone)
    }

    fn unchecked(vectors: Vec<Vec<i64>>) -> Result<Self> {
        let Some(n) = vectors.first().map(Vec::len) else {
            return Err(Error::NotFullDim { rank: 0, ambient: 0 });
        };
        if vectors.len() > 128 {
            return Err(Error::TooManyRays(vectors.len()));
        }
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch("vectors of different lengths".into()));
        }
        if vectors.iter().any(|v| v.iter().all(|&c| c == 0)) {
            return Err(Error::ZeroVector);
        }
        let rays = vectors.iter().map(|x| rank_one_flat(x)).collect();
        Ok(PolyCone { n, vectors, rays, facets: OnceLock::new() })
    }

    fn check_extreme(&self) -> Result<()> {
        let d = self.ambient_dim();
        let facets = self.facets();
        for i in 0..self.num_rays() {
            let normals: Vec<Vec<BigInt>> =
                facets.iter().filter(|f| f.incident.contains(i)).map(|f| pairing_coords(&f.normal)).collect();
            if rank_int(&normals, d) != d - 1 {
                return Err(Error::NotExtreme(i));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        sym_dim(self.n)
    }

    pub fn num_rays(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<i64>] {
        &self.vectors
    }

    /// Flattened rank-one matrices, one per vector.
    pub fn rays(&self) -> &[Vec<BigInt>] {
        &self.rays
    }

    pub fn all(&self) -> RaySet {
        RaySet::full(self.num_rays())
    }

    pub fn facets(&self) -> &[FacetRec] {
        self.facets.get_or_init(|| dual_description(&self.vectors))
    }

    pub fn face_vectors(&self, face: RaySet) -> Vec<Vec<i64>> {
        face.iter().map(|i| self.vectors[i].clone()).collect()
    }

    /// Dimension of the linear span of a face.
    pub fn face_rank(&self, face: RaySet) -> usize {
        let rows: Vec<Vec<BigInt>> = face.iter().map(|i| self.rays[i].clone()).collect();
        rank_int(&rows, self.ambient_dim())
    }

    /// Faces of codimension `k`, each as its set of incident rays, sorted.
    pub fn faces_of_codim(&self, k: usize) -> Vec<RaySet> {
        let d = self.ambient_dim();
        if k > d {
            return Vec::new();
        }
        let mut current = vec![self.all()];
        let facets: Vec<RaySet> = self.facets().iter().map(|f| f.incident).collect();
        for level in 1..=k {
            let mut next: Vec<RaySet> = Vec::new();
            for &g in &current {
                for &f in &facets {
                    let h = g.intersect(f);
                    if h == g || next.contains(&h) {
                        continue;
                    }
                    if level == 1 || self.face_rank(h) == d - level {
                        next.push(h);
                    }
                }
            }
            next.sort();
            current = next;
        }
        current
    }
}

/// Whether the relative interior of the face spanned by `x xᵀ`, `x ∈ vectors`,
/// touches the boundary of the positive definite cone: true iff the vectors do
/// not span `Qⁿ`.
pub fn meets_boundary(vectors: &[Vec<i64>]) -> bool {
    let Some(n) = vectors.first().map(Vec::len) else {
        return true;
    };
    let rows: Vec<Vec<BigInt>> = vectors.iter().map(|v| v.iter().map(|&c| BigInt::from(c)).collect()).collect();
    rank_int(&rows, n) < n
}

/// Upper-triangle coordinates of a symmetric matrix in which the pairing with
/// a ray is the plain dot product with [`pairing_row`].
fn pairing_coords(n: &IntMat) -> Vec<BigInt> {
    crate::forms::flatten_sym(n)
}

/// Facets of the cone over `vectors` by double description; sorted by incident set.
fn dual_description(vectors: &[Vec<i64>]) -> Vec<FacetRec> {
    let n = vectors[0].len();
    let d = sym_dim(n);
    let cons: Vec<Vec<BigInt>> = vectors.iter().map(|x| pairing_row(x)).collect();
    let basis = crate::linalg::independent_subset(&cons, d);
    assert_eq!(basis.len(), d, "cone must be full-dimensional");

    struct DRay {
        v: Vec<BigInt>,
        zeros: RaySet,
    }

    // Initial simplicial cone: rays tight on all basis constraints but one.
    let mut rays: Vec<DRay> = Vec::with_capacity(d);
    for (j, &bj) in basis.iter().enumerate() {
        let rows: Vec<Vec<BigInt>> =
            basis.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &b)| cons[b].clone()).collect();
        let mut ker = kernel_int(&rows, d);
        debug_assert_eq!(ker.len(), 1);
        let mut v = ker.pop().expect("one-dimensional kernel");
        if dot(&cons[bj], &v).is_negative() {
            v.iter_mut().for_each(|c| *c = -&*c);
        }
        let zeros = basis.iter().copied().filter(|&b| b != bj).collect();
        rays.push(DRay { v, zeros });
    }

    let mut processed: RaySet = basis.iter().copied().collect();
    for (k, con) in cons.iter().enumerate() {
        if processed.contains(k) {
            continue;
        }
        processed.insert(k);
        let vals: Vec<BigInt> = rays.iter().map(|r| dot(con, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        if neg.is_empty() {
            for (r, val) in rays.iter_mut().zip(&vals) {
                if val.is_zero() {
                    r.zeros.insert(k);
                }
            }
            continue;
        }
        let mut new_rays: Vec<DRay> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].zeros.intersect(rays[q].zeros);
                if common.len() + 2 < d {
                    continue;
                }
                let blocked = rays.iter().enumerate().any(|(i, r)| i != p && i != q && common.is_subset(r.zeros));
                if blocked {
                    continue;
                }
                let a = &vals[p];
                let b = -&vals[q];
                let v: Vec<BigInt> = rays[q].v.iter().zip(&rays[p].v).map(|(x, y)| a * x + &b * y).collect();
                let mut zeros = common;
                zeros.insert(k);
                new_rays.push(DRay { v: primitive_vec(&v), zeros });
            }
        }
        let mut kept: Vec<DRay> = Vec::with_capacity(rays.len() + new_rays.len());
        for (r, val) in rays.into_iter().zip(&vals) {
            if val.is_negative() {
                continue;
            }
            let mut r = r;
            if val.is_zero() {
                r.zeros.insert(k);
            }
            kept.push(r);
        }
        kept.extend(new_rays);
        rays = kept;
    }

    let mut facets: Vec<FacetRec> =
        rays.into_iter().map(|r| FacetRec { normal: unflatten_sym(n, &r.v).primitive(), incident: r.zeros }).collect();
    facets.sort_by_key(|f| f.incident);
    facets
}

/// Reference facet enumeration over all `(D−1)`-subsets of rays; exponential.
pub fn brute_force_facets(cone: &PolyCone) -> Vec<FacetRec> {
    let d = cone.ambient_dim();
    let n = cone.n();
    let m = cone.num_rays();
    let cons: Vec<Vec<BigInt>> = cone.vectors().iter().map(|x| pairing_row(x)).collect();
    let mut found: Vec<FacetRec> = Vec::new();
    let mut subset: Vec<usize> = (0..d - 1).collect();
    if d - 1 > m {
        return found;
    }
    loop {
        let rows: Vec<Vec<BigInt>> = subset.iter().map(|&i| cons[i].clone()).collect();
        let ker = kernel_int(&rows, d);
        if ker.len() == 1 {
            let mut v = ker[0].clone();
            let vals: Vec<BigInt> = cons.iter().map(|c| dot(c, &v)).collect();
            let has_pos = vals.iter().any(Signed::is_positive);
            let has_neg = vals.iter().any(Signed::is_negative);
            if !(has_pos && has_neg) {
                if has_neg {
                    v.iter_mut().for_each(|c| *c = -&*c);
                }
                let incident: RaySet = (0..m).filter(|&i| vals[i].is_zero()).collect();
                if !found.iter().any(|f| f.incident == incident) {
                    found.push(FacetRec { normal: unflatten_sym(n, &v).primitive(), incident });
                }
            }
        }
        // Next combination in lexicographic order.
        let k = subset.len();
        let Some(i) = (0..k).rev().find(|&i| subset[i] < m - k + i) else {
            break;
        };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    found.sort_by_key(|f| f.incident);
    found
}

/// `xᵀ N x`.
pub fn normal_value(normal: &IntMat, x: &[i64]) -> BigInt {
    eval(normal, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{minimum_and_minimal_vectors, QForm};

    fn cone_of(h: &QForm) -> PolyCone {
        PolyCone::build(&minimum_and_minimal_vectors(h).unwrap()).unwrap()
    }

    #[test]
    fn a2_is_a_simplex() {
        let c = cone_of(&QForm::a_n(2));
        assert_eq!(c.num_rays(), 3);
        assert_eq!(c.ambient_dim(), 3);
        assert_eq!(c.facets().len(), 3);
        for f in c.facets() {
            assert_eq!(f.incident.len(), 2);
        }
        assert_eq!(c.faces_of_codim(1).len(), 3);
        assert_eq!(c.faces_of_codim(2).len(), 3);
        assert_eq!(c.faces_of_codim(0), vec![c.all()]);
    }

    #[test]
    fn simplicial_cone_faces() {
        let c = cone_of(&QForm::a_n(3));
        assert_eq!(c.num_rays(), 6);
        assert_eq!(c.facets().len(), 6);
        assert_eq!(c.faces_of_codim(2).len(), 15);
    }

    #[test]
    fn identity_is_not_full_dimensional() {
        let m = minimum_and_minimal_vectors(&QForm::from_i64_rows(&[[1, 0], [0, 1]]).unwrap()).unwrap();
        assert!(matches!(PolyCone::build(&m), Err(Error::NotFullDim { rank: 2, ambient: 3 })));
    }

    #[test]
    fn d4_matches_brute_force() {
        let c = cone_of(&QForm::d_n(4));
        assert_eq!(c.num_rays(), 12);
        let bf = brute_force_facets(&c);
        assert_eq!(c.facets(), bf.as_slice());
    }

    #[test]
    fn normals_are_inward_and_tight() {
        for h in [QForm::a_n(3), QForm::a_n(4), QForm::d_n(4)] {
            let c = cone_of(&h);
            for f in c.facets() {
                assert_eq!(f.normal.content(), BigInt::from(1));
                for (i, x) in c.vectors().iter().enumerate() {
                    let v = normal_value(&f.normal, x);
                    assert_eq!(v.is_zero(), f.incident.contains(i));
                    assert!(!v.is_negative());
                }
                assert_eq!(c.face_rank(f.incident), c.ambient_dim() - 1);
            }
        }
    }

    #[test]
    fn boundary_examples() {
        assert!(meets_boundary(&[vec![1, 0]]));
        assert!(!meets_boundary(&[vec![1, 0], vec![0, 1], vec![1, -1]]));
        assert!(!meets_boundary(&[vec![1, 0], vec![0, 1]]));
    }

    #[test]
    fn rayset_ops() {
        let a: RaySet = [0, 3, 5].into_iter().collect();
        assert_eq!(a.len(), 3);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 3, 5]);
        assert!(RaySet::single(3).is_subset(a));
        assert_eq!(a.minus(RaySet::single(0)), [3, 5].into_iter().collect());
        assert_eq!(RaySet::full(128).len(), 128);
        assert_eq!(serde_json::to_string(&a).unwrap(), "[0,3,5]");
    }
}
