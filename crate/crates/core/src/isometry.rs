//! Isometries between finite symmetric vector configurations.
//!
//! A configuration is a set of lattice vectors (one per ± pair) together with
//! a positive definite integral form that every symmetry must preserve. An
//! isometry `A → B` is a unimodular `g` with `g·A = B` as sets of ± pairs and
//! `F_B(gx, gy) = F_A(x, y)`. The search backtracks over images of a basis
//! chosen among the vectors, pruning with pairing values and per-vector
//! fingerprints.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::forms::{bilinear, rank_one};
use crate::group::{canonical_sign, GroupElement, MatGroup};
use crate::linalg::{independent_subset, IntMat};

#[derive(Clone, Debug)]
pub struct VectorConfig {
    n: usize,
    vectors: Vec<Vec<i64>>,
    form: IntMat,
}

impl VectorConfig {
    /// `form` must be positive definite and invariant under the symmetries sought.
    pub fn new(vectors: Vec<Vec<i64>>, form: IntMat) -> Self {
        let n = form.rows();
        let vectors = vectors.iter().map(|v| canonical_sign(v)).collect();
        VectorConfig { n, vectors, form }
    }

    /// Uses the adjugate of `Σ x xᵀ`, which every symmetry of the set preserves.
    ///
    /// The vectors must span `Qⁿ`.
    pub fn for_face(vectors: Vec<Vec<i64>>) -> Self {
        let n = vectors[0].len();
        let mut b = IntMat::zeros(n, n);
        for x in &vectors {
            b = b.add(&rank_one(x).expect("nonzero vector"));
        }
        VectorConfig::new(vectors, b.adjugate().primitive())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &[Vec<i64>] {
        &self.vectors
    }

    pub fn form(&self) -> &IntMat {
        &self.form
    }
}

/// Precomputed pairing data for the ± closure of a configuration.
struct Prepared {
    all: Vec<Vec<i64>>,
    gram: Vec<Vec<i64>>,
    fingerprints: Vec<Vec<i64>>,
    set: HashSet<Vec<i64>>,
}

fn small(x: BigInt) -> i64 {
    x.to_i64().expect("pairing value fits in i64")
}

fn prepare(c: &VectorConfig) -> Prepared {
    let mut all = Vec::with_capacity(2 * c.vectors.len());
    for v in &c.vectors {
        all.push(v.clone());
        all.push(v.iter().map(|&x| -x).collect());
    }
    let m = all.len();
    let mut gram = vec![vec![0i64; m]; m];
    for i in 0..m {
        for j in i..m {
            let p = small(bilinear(&c.form, &all[i], &all[j]));
            gram[i][j] = p;
            gram[j][i] = p;
        }
    }
    let fingerprints = (0..m)
        .map(|i| {
            let mut f: Vec<i64> = (0..m).map(|j| gram[i][j].abs()).collect();
            f.sort_unstable();
            f.insert(0, gram[i][i]);
            f
        })
        .collect();
    let set = c.vectors.iter().cloned().collect();
    Prepared { all, gram, fingerprints, set }
}

fn invariants_match(a: &Prepared, b: &Prepared, ca: &VectorConfig, cb: &VectorConfig) -> bool {
    if ca.n != cb.n || a.all.len() != b.all.len() || ca.form.det() != cb.form.det() {
        return false;
    }
    let mut fa = a.fingerprints.clone();
    let mut fb = b.fingerprints.clone();
    fa.sort();
    fb.sort();
    fa == fb
}

struct Search<'a> {
    n: usize,
    a: &'a Prepared,
    b: &'a Prepared,
    basis: Vec<usize>,
    basis_adj: IntMat,
    basis_det: BigInt,
    candidates: Vec<Vec<usize>>,
    first_only: bool,
    found: Vec<GroupElement>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, chosen: &mut Vec<usize>) {
        if self.first_only && !self.found.is_empty() {
            return;
        }
        if depth == self.n {
            if let Some(g) = self.complete(chosen) {
                self.found.push(g);
            }
            return;
        }
        let bi = self.basis[depth];
        for ci in 0..self.candidates[depth].len() {
            let y = self.candidates[depth][ci];
            let ok = (0..depth).all(|j| self.b.gram[y][chosen[j]] == self.a.gram[bi][self.basis[j]]);
            if !ok {
                continue;
            }
            chosen.push(y);
            self.run(depth + 1, chosen);
            chosen.pop();
        }
    }

    /// `g = Y B⁻¹` if integral, unimodular and mapping the configuration onto the target.
    fn complete(&self, chosen: &[usize]) -> Option<GroupElement> {
        let n = self.n;
        let mut y = IntMat::zeros(n, n);
        for (col, &idx) in chosen.iter().enumerate() {
            for row in 0..n {
                y.set(row, col, BigInt::from(self.b.all[idx][row]));
            }
        }
        let num = y.mul(&self.basis_adj);
        let mut entries = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let v = num.get(i, j);
                if !(v % &self.basis_det).is_zero() {
                    return None;
                }
                row.push((v / &self.basis_det).to_i64()?);
            }
            entries.push(row);
        }
        let g = GroupElement::from_rows(&entries).ok()?;
        let maps_onto = self.a.set.iter().all(|x| self.b.set.contains(&canonical_sign(&g.apply(x))));
        maps_onto.then_some(g)
    }
}

fn search(a: &VectorConfig, b: &VectorConfig, first_only: bool) -> Vec<GroupElement> {
    let pa = prepare(a);
    let pb = prepare(b);
    if !invariants_match(&pa, &pb, a, b) {
        return Vec::new();
    }
    let n = a.n;
    let rows: Vec<Vec<BigInt>> = pa.all.iter().map(|v| v.iter().map(|&c| BigInt::from(c)).collect()).collect();
    let basis = order_basis(&pa, independent_subset(&rows, n));
    if basis.len() < n {
        return Vec::new();
    }
    let mut bm = IntMat::zeros(n, n);
    for (col, &idx) in basis.iter().enumerate() {
        for row in 0..n {
            bm.set(row, col, BigInt::from(pa.all[idx][row]));
        }
    }
    let mut basis_det = bm.det();
    let mut basis_adj = bm.adjugate();
    if basis_det.is_negative() {
        basis_det = -basis_det;
        basis_adj = basis_adj.scale(&BigInt::from(-1));
    }
    let candidates = basis
        .iter()
        .map(|&i| (0..pb.all.len()).filter(|&j| pb.fingerprints[j] == pa.fingerprints[i]).collect())
        .collect();
    let mut s = Search { n, a: &pa, b: &pb, basis, basis_adj, basis_det, candidates, first_only, found: Vec::new() };
    s.run(0, &mut Vec::with_capacity(n));
    s.found
}

/// Reorder basis indices so that each vector has as many nonzero pairings
/// with the previous ones as possible (earlier pruning).
fn order_basis(p: &Prepared, basis: Vec<usize>) -> Vec<usize> {
    let mut rest = basis;
    let mut out: Vec<usize> = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let (k, _) = rest
            .iter()
            .enumerate()
            .max_by_key(|&(_, &i)| {
                let links = out.iter().filter(|&&j| p.gram[i][j] != 0).count();
                (links, std::cmp::Reverse(i))
            })
            .expect("nonempty");
        out.push(rest.remove(k));
    }
    out
}

/// Some isometry `a → b`, if one exists.
pub fn find_isometry(a: &VectorConfig, b: &VectorConfig) -> Option<GroupElement> {
    search(a, b, true).pop()
}

/// All isometries `a → a`.
pub fn automorphism_group(a: &VectorConfig) -> MatGroup {
    MatGroup::from_elements(a.n, search(a, a, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{act, minimum_and_minimal_vectors, QForm};

    fn config(h: &QForm) -> VectorConfig {
        VectorConfig::new(minimum_and_minimal_vectors(h).unwrap().vectors, h.gram().clone())
    }

    /// All 2x2 unimodular matrices with entries in [-2, 2] fixing the form.
    fn brute_stabilizer(h: &QForm) -> Vec<GroupElement> {
        let mut out = Vec::new();
        let r = -2..=2i64;
        for a in r.clone() {
            for b in r.clone() {
                for c in r.clone() {
                    for d in r.clone() {
                        if let Ok(g) = GroupElement::from_rows(&[[a, b], [c, d]]) {
                            if act(&g, h.gram()) == *h.gram() {
                                out.push(g);
                            }
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn a2_stabilizer_matches_brute_force() {
        let h = QForm::a_n(2);
        let g = automorphism_group(&config(&h));
        assert_eq!(g.order(), 12);
        assert!(g.is_closed());
        assert_eq!(g.elements(), brute_stabilizer(&h).as_slice());
        assert_eq!(g.det_one_part().order(), 6);
    }

    #[test]
    fn root_lattice_orders() {
        assert_eq!(automorphism_group(&config(&QForm::a_n(3))).order(), 48);
        assert_eq!(automorphism_group(&config(&QForm::a_n(4))).order(), 240);
        assert_eq!(automorphism_group(&config(&QForm::d_n(4))).order(), 1152);
    }

    #[test]
    fn equivalence_witness() {
        let h = QForm::a_n(3);
        let u = GroupElement::from_rows(&[[1, 1, 0], [0, 1, 2], [0, 0, 1]]).unwrap();
        let h2 = h.act(&u);
        let g = find_isometry(&config(&h), &config(&h2)).unwrap();
        assert_eq!(h.act(&g), h2);
        assert!(find_isometry(&config(&QForm::a_n(4)), &config(&QForm::d_n(4))).is_none());
    }

    #[test]
    fn face_stabilizer_is_o2() {
        let c = VectorConfig::for_face(vec![vec![1, 0], vec![0, 1]]);
        let g = automorphism_group(&c);
        assert_eq!(g.order(), 8);
        for x in g.iter() {
            assert!(x.transpose().mul(x).is_identity());
        }
    }
}
