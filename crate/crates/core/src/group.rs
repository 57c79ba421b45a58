//! Unimodular integer matrices and explicitly enumerated finite matrix groups.
//!
//! Group elements act on lattice vectors by `x ↦ g·x`, on rank-one (and all
//! symmetric) matrices by `X ↦ g X gᵀ`, and on forms contragrediently by
//! `Q ↦ g⁻ᵀ Q g⁻¹`, so that the trace pairing between forms and rays is
//! invariant. Entries are machine integers: every element we ever build
//! permutes a finite set of short vectors, and all arithmetic is checked.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::IntMat;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct GroupElement {
    n: usize,
    entries: Vec<i64>,
}

fn checked_dot(a: impl Iterator<Item = (i64, i64)>) -> i64 {
    a.fold(0i64, |acc, (x, y)| {
        x.checked_mul(y).and_then(|p| acc.checked_add(p)).expect("group element arithmetic overflowed i64")
    })
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        GroupElement { n, entries }
    }

    pub fn diag(d: &[i64]) -> Result<Self> {
        let n = d.len();
        let mut entries = vec![0; n * n];
        for (i, &x) in d.iter().enumerate() {
            entries[i * n + i] = x;
        }
        GroupElement::from_entries(n, entries)
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::DimensionMismatch("group element must be square".into()));
            }
            entries.extend_from_slice(r);
        }
        GroupElement::from_entries(n, entries)
    }

    fn from_entries(n: usize, entries: Vec<i64>) -> Result<Self> {
        let g = GroupElement { n, entries };
        let d = g.to_intmat().det();
        if d != BigInt::from(1) && d != BigInt::from(-1) {
            return Err(Error::NotUnimodular(d.to_string()));
        }
        Ok(g)
    }

    /// Build from an integer matrix, checking that it is unimodular and fits in i64.
    pub fn from_intmat(m: &IntMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("group element must be square".into()));
        }
        let entries = m
            .entries()
            .iter()
            .map(|x| x.to_i64().ok_or_else(|| Error::Overflow(x.to_string())))
            .collect::<Result<Vec<_>>>()?;
        GroupElement::from_entries(m.rows(), entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn to_intmat(&self) -> IntMat {
        IntMat::from_i64_rows(&self.rows())
    }

    pub fn det(&self) -> i64 {
        // Unimodular by construction.
        self.to_intmat().det().to_i64().expect("unimodular determinant")
    }

    pub fn is_identity(&self) -> bool {
        *self == GroupElement::identity(self.n)
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = checked_dot((0..n).map(|k| (self.get(i, k), other.get(k, j))));
            }
        }
        GroupElement { n, entries }
    }

    pub fn inverse(&self) -> GroupElement {
        // g⁻¹ = det(g)·adj(g) for det(g) = ±1.
        let adj = self.to_intmat().adjugate();
        let d = self.det();
        let entries = adj.entries().iter().map(|x| x.to_i64().expect("adjugate of a unimodular element") * d).collect();
        GroupElement { n: self.n, entries }
    }

    pub fn transpose(&self) -> GroupElement {
        let n = self.n;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.get(i, j);
            }
        }
        GroupElement { n, entries }
    }

    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| checked_dot((0..self.n).map(|k| (self.get(i, k), x[k])))).collect()
    }
}

impl TryFrom<Vec<Vec<i64>>> for GroupElement {
    type Error = Error;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        GroupElement::from_rows(&rows)
    }
}

impl From<GroupElement> for Vec<Vec<i64>> {
    fn from(g: GroupElement) -> Self {
        g.rows()
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> =
            self.rows().iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")).collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

/// The vector of a ± pair whose first nonzero coordinate is positive.
pub fn canonical_sign(x: &[i64]) -> Vec<i64> {
    match x.iter().find(|&&c| c != 0) {
        Some(&c) if c < 0 => x.iter().map(|&c| -c).collect(),
        _ => x.to_vec(),
    }
}

/// A finite group of unimodular matrices with all its elements listed.
///
/// Serialized as generators and order; the elements are regenerated on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GroupRepr", into = "GroupRepr")]
pub struct MatGroup {
    n: usize,
    elements: Vec<GroupElement>,
    lookup: HashMap<GroupElement, usize>,
    generators: OnceLock<Vec<GroupElement>>,
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    n: usize,
    order: usize,
    generators: Vec<GroupElement>,
}

impl From<MatGroup> for GroupRepr {
    fn from(g: MatGroup) -> Self {
        GroupRepr { n: g.n, order: g.order(), generators: g.generators() }
    }
}

impl TryFrom<GroupRepr> for MatGroup {
    type Error = Error;
    fn try_from(r: GroupRepr) -> Result<Self> {
        if r.generators.iter().any(|g| g.n() != r.n) {
            return Err(Error::DimensionMismatch("generator of the wrong size".into()));
        }
        let g = MatGroup::closure(r.n, &r.generators);
        if g.order() != r.order {
            return Err(Error::Inconsistent(format!("generators give order {}, stored {}", g.order(), r.order)));
        }
        Ok(g)
    }
}

impl MatGroup {
    /// Deduplicates and sorts; does not check closure.
    pub fn from_elements(n: usize, mut elements: Vec<GroupElement>) -> Self {
        elements.sort();
        elements.dedup();
        let lookup = elements.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        MatGroup { n, elements, lookup, generators: OnceLock::new() }
    }

    pub fn trivial(n: usize) -> Self {
        MatGroup::from_elements(n, vec![GroupElement::identity(n)])
    }

    /// The group generated by `gens`, enumerated breadth-first.
    pub fn closure(n: usize, gens: &[GroupElement]) -> Self {
        let id = GroupElement::identity(n);
        let mut seen: HashMap<GroupElement, ()> = HashMap::new();
        seen.insert(id.clone(), ());
        let mut queue = VecDeque::from([id]);
        let mut elements = Vec::new();
        while let Some(g) = queue.pop_front() {
            for s in gens {
                let h = s.mul(&g);
                if !seen.contains_key(&h) {
                    seen.insert(h.clone(), ());
                    queue.push_back(h);
                }
            }
            elements.push(g);
        }
        MatGroup::from_elements(n, elements)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> {
        self.elements.iter()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.lookup.contains_key(g)
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.lookup.get(g).copied()
    }

    pub fn is_closed(&self) -> bool {
        self.contains(&GroupElement::identity(self.n))
            && self.elements.iter().all(|g| self.contains(&g.inverse()))
            && self.elements.iter().all(|a| self.elements.iter().all(|b| self.contains(&a.mul(b))))
    }

    pub fn has_det_minus_one(&self) -> bool {
        self.elements.iter().any(|g| g.det() == -1)
    }

    pub fn det_one_part(&self) -> MatGroup {
        MatGroup::from_elements(self.n, self.elements.iter().filter(|g| g.det() == 1).cloned().collect())
    }

    pub fn filter(&self, pred: impl Fn(&GroupElement) -> bool) -> MatGroup {
        MatGroup::from_elements(self.n, self.elements.iter().filter(|g| pred(g)).cloned().collect())
    }

    pub fn intersect(&self, other: &MatGroup) -> MatGroup {
        self.filter(|g| other.contains(g))
    }

    /// `u G u⁻¹`.
    pub fn conjugate(&self, u: &GroupElement) -> MatGroup {
        let ui = u.inverse();
        MatGroup::from_elements(self.n, self.elements.iter().map(|g| u.mul(g).mul(&ui)).collect())
    }

    /// A small generating set, picked deterministically from a strided scan.
    /// Computed once and cached.
    pub fn generators(&self) -> Vec<GroupElement> {
        self.generators.get_or_init(|| self.find_generators()).clone()
    }

    fn find_generators(&self) -> Vec<GroupElement> {
        let order = self.order();
        // Stride coprime to the order so the scan visits every element.
        let stride = (1..).map(|k| order / 2 + k).find(|&s| num_integer::gcd(s, order.max(1)) == 1).unwrap_or(1);
        let id = self.index_of(&GroupElement::identity(self.n)).expect("group contains the identity");
        let mut gens: Vec<GroupElement> = Vec::new();
        // The span so far, as indices into `elements`; always a union of right cosets of the previous span.
        let mut in_span = vec![false; order];
        in_span[id] = true;
        let mut span = vec![id];
        let mut idx = 0usize;
        for _ in 0..order {
            if span.len() == order {
                break;
            }
            idx = (idx + stride) % order;
            if in_span[idx] {
                continue;
            }
            gens.push(self.elements[idx].clone());
            // Extend the subgroup S = span to <S, g> one right coset S·e at a time.
            let base = span.clone();
            let mut reps = vec![id];
            let mut r = 0;
            while r < reps.len() {
                for s in &gens {
                    let e = self.elements[reps[r]].mul(s);
                    let ei = self.index_of(&e).expect("generators lie in the group");
                    if in_span[ei] {
                        continue;
                    }
                    reps.push(ei);
                    for &x in &base {
                        let xe = self.index_of(&self.elements[x].mul(&e)).expect("closed under products");
                        in_span[xe] = true;
                        span.push(xe);
                    }
                }
                r += 1;
            }
        }
        gens
    }

    /// Orbit of `x` (a ± class) together with, for each orbit point, one element reaching it.
    pub fn orbit_of_vector(&self, x: &[i64]) -> Vec<(Vec<i64>, GroupElement)> {
        let mut out: Vec<(Vec<i64>, GroupElement)> = Vec::new();
        let mut seen = HashMap::new();
        for g in &self.elements {
            let y = canonical_sign(&g.apply(x));
            if !seen.contains_key(&y) {
                seen.insert(y.clone(), ());
                out.push((y, g.clone()));
            }
        }
        out
    }
}

impl PartialEq for MatGroup {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.elements == other.elements
    }
}

impl Eq for MatGroup {}

#[cfg(test)]
mod tests {
    use super::*;

    fn g<const N: usize>(rows: &[[i64; N]]) -> GroupElement {
        GroupElement::from_rows(rows).unwrap()
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(matches!(GroupElement::from_rows(&[[2, 0], [0, 1]]), Err(Error::NotUnimodular(_))));
    }

    #[test]
    fn inverse_and_det() {
        let a = g(&[[2, 1], [1, 1]]);
        assert_eq!(a.det(), 1);
        assert!(a.mul(&a.inverse()).is_identity());
        let b = g(&[[0, 1], [1, 0]]);
        assert_eq!(b.det(), -1);
        assert_eq!(b.inverse(), b);
    }

    #[test]
    fn closure_of_signed_permutations() {
        let swap = g(&[[0, 1], [1, 0]]);
        let flip = g(&[[-1, 0], [0, 1]]);
        let grp = MatGroup::closure(2, &[swap, flip]);
        assert_eq!(grp.order(), 8);
        assert!(grp.is_closed());
        assert_eq!(grp.det_one_part().order(), 4);
        let gens = grp.generators();
        assert_eq!(MatGroup::closure(2, &gens), grp);
    }

    #[test]
    fn generators_of_hyperoctahedral_group() {
        let cycle = g(&[[0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]);
        let swap = g(&[[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]);
        let flip = g(&[[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]);
        let grp = MatGroup::closure(4, &[cycle, swap, flip]);
        assert_eq!(grp.order(), 384);
        let gens = grp.generators();
        assert!(gens.len() <= 9);
        assert_eq!(MatGroup::closure(4, &gens), grp);
        assert_eq!(grp.generators(), gens);
    }

    #[test]
    fn canonical_sign_flips_leading_negative() {
        assert_eq!(canonical_sign(&[0, -1, 2]), vec![0, 1, -2]);
        assert_eq!(canonical_sign(&[1, -1]), vec![1, -1]);
    }

    #[test]
    fn serde_as_rows() {
        let a = g(&[[1, 1], [0, 1]]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[[1,1],[0,1]]");
        let back: GroupElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<GroupElement>("[[2,0],[0,1]]").is_err());
    }
}
