//! Voronoi's algorithm: perfect forms up to `GL_n(Z)`/`SL_n(Z)`-equivalence,
//! their stabilizers, and the quotient Voronoi graph.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use log::{debug, info};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{meets_boundary, FacetRec, PolyCone, RaySet};
use crate::error::{Error, Result};
use crate::forms::{act, eval, is_perfect, minimum_and_minimal_vectors, short_vectors, MinVecSet, QForm};
use crate::group::{canonical_sign, GroupElement, MatGroup};
use crate::isometry::{automorphism_group, find_isometry, VectorConfig};
use crate::linalg::{IntMat, RatMat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Gl,
    Sl,
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Gl => "gl",
            GroupKind::Sl => "sl",
        })
    }
}

impl std::str::FromStr for GroupKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gl" => Ok(GroupKind::Gl),
            "sl" => Ok(GroupKind::Sl),
            other => Err(Error::Parse(format!("unknown group kind {other:?}; expected gl or sl"))),
        }
    }
}

/// A perfect form with its Voronoi domain and the stabilizer of the domain in Γ.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RepRepr", into = "RepRepr")]
pub struct PerfectFormRep {
    pub name: String,
    pub form: QForm,
    pub minvecs: MinVecSet,
    pub domain: PolyCone,
    pub stabilizer: MatGroup,
    index: HashMap<Vec<i64>, usize>,
}

#[derive(Serialize, Deserialize)]
struct RepRepr {
    name: String,
    form: QForm,
    minvecs: MinVecSet,
    facets: Vec<FacetRec>,
    stabilizer: MatGroup,
}

impl From<PerfectFormRep> for RepRepr {
    fn from(r: PerfectFormRep) -> Self {
        let facets = r.facets().to_vec();
        RepRepr { name: r.name, form: r.form, minvecs: r.minvecs, facets, stabilizer: r.stabilizer }
    }
}

impl TryFrom<RepRepr> for PerfectFormRep {
    type Error = Error;
    fn try_from(r: RepRepr) -> Result<Self> {
        if minimum_and_minimal_vectors(&r.form)? != r.minvecs {
            return Err(Error::Inconsistent(format!("stored minimal vectors of {} are wrong", r.name)));
        }
        let domain = PolyCone::with_facets(r.minvecs.vectors.clone(), r.facets)?;
        let rep = PerfectFormRep::assemble(r.name, r.form, r.minvecs, domain, r.stabilizer);
        let all = rep.domain.all();
        if rep.stabilizer.iter().any(|g| rep.map_rays(g, &rep, all) != Some(all)) {
            return Err(Error::Inconsistent(format!("stored stabilizer of {} moves the domain", rep.name)));
        }
        Ok(rep)
    }
}

impl PerfectFormRep {
    /// Computes minimal vectors, domain, facets and the full `GL_n(Z)` stabilizer.
    pub fn new(name: impl Into<String>, form: QForm) -> Result<Self> {
        let minvecs = minimum_and_minimal_vectors(&form)?;
        if !is_perfect(&minvecs) {
            return Err(Error::Inconsistent(format!("form {form} is not perfect")));
        }
        let domain = PolyCone::build(&minvecs)?;
        let stabilizer = automorphism_group(&VectorConfig::new(minvecs.vectors.clone(), form.gram().clone()));
        Ok(PerfectFormRep::assemble(name.into(), form, minvecs, domain, stabilizer))
    }

    pub(crate) fn assemble(
        name: String,
        form: QForm,
        minvecs: MinVecSet,
        domain: PolyCone,
        stabilizer: MatGroup,
    ) -> Self {
        let index = minvecs.vectors.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        PerfectFormRep { name, form, minvecs, domain, stabilizer, index }
    }

    pub fn n(&self) -> usize {
        self.form.n()
    }

    pub fn stab_order(&self) -> usize {
        self.stabilizer.order()
    }

    pub fn facets(&self) -> &[FacetRec] {
        self.domain.facets()
    }

    /// Index of the ray `x xᵀ` among this cell's rays.
    pub fn ray_index(&self, x: &[i64]) -> Option<usize> {
        self.index.get(&canonical_sign(x)).copied()
    }

    /// Image of a ray set under `g`, if `g` maps those rays into this cell.
    pub fn map_rays(&self, g: &GroupElement, from: &PerfectFormRep, face: RaySet) -> Option<RaySet> {
        face.iter().map(|i| self.ray_index(&g.apply(&from.minvecs.vectors[i]))).collect()
    }

    pub fn facet_index(&self, face: RaySet) -> Option<usize> {
        self.facets().binary_search_by_key(&face, |f| f.incident).ok()
    }

    /// The same cell moved by `u`: form `u·h`, rays `u x`, stabilizer `u G u⁻¹`.
    pub fn transform(&self, u: &GroupElement, name: impl Into<String>) -> PerfectFormRep {
        let form = self.form.act(u);
        let mut vectors: Vec<Vec<i64>> = self.minvecs.vectors.iter().map(|x| canonical_sign(&u.apply(x))).collect();
        vectors.sort();
        let new_index: HashMap<&Vec<i64>, usize> = vectors.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let perm: Vec<usize> = self.minvecs.vectors.iter().map(|x| new_index[&canonical_sign(&u.apply(x))]).collect();
        let mut facets: Vec<FacetRec> = self
            .facets()
            .iter()
            .map(|f| FacetRec {
                normal: act(u, &f.normal).primitive(),
                incident: f.incident.iter().map(|i| perm[i]).collect(),
            })
            .collect();
        facets.sort_by_key(|f| f.incident);
        let minvecs = MinVecSet { vectors: vectors.clone(), min_value: self.minvecs.min_value.clone() };
        let domain = PolyCone::with_facets(vectors, facets).expect("transformed cone is valid");
        let stabilizer = self.stabilizer.conjugate(u);
        PerfectFormRep::assemble(name.into(), form, minvecs, domain, stabilizer)
    }

    /// Group element mapping facet `f` of this cell to each facet in its
    /// stabilizer orbit, keyed by facet index.
    pub fn facet_orbit(&self, f: usize) -> Vec<(usize, GroupElement)> {
        let gens = self.stabilizer.generators();
        let mut seen: HashMap<usize, GroupElement> = HashMap::new();
        seen.insert(f, GroupElement::identity(self.n()));
        let mut queue = VecDeque::from([f]);
        let mut out = vec![(f, GroupElement::identity(self.n()))];
        while let Some(k) = queue.pop_front() {
            let s = seen[&k].clone();
            for g in &gens {
                let img = self
                    .map_rays(g, self, self.facets()[k].incident)
                    .and_then(|r| self.facet_index(r))
                    .expect("stabilizer permutes facets");
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(img) {
                    let t = g.mul(&s);
                    e.insert(t.clone());
                    queue.push_back(img);
                    out.push((img, t));
                }
            }
        }
        out.sort_by_key(|(k, _)| *k);
        out
    }

    /// Partition of the facets into stabilizer orbits, each as a sorted list; orbits
    /// ordered by smallest member.
    pub fn facet_orbits(&self) -> Vec<Vec<(usize, GroupElement)>> {
        let mut assigned = vec![false; self.facets().len()];
        let mut orbits = Vec::new();
        for f in 0..self.facets().len() {
            if assigned[f] {
                continue;
            }
            let orbit = self.facet_orbit(f);
            for (k, _) in &orbit {
                assigned[*k] = true;
            }
            orbits.push(orbit);
        }
        orbits
    }
}

/// `D(from) ∩ witness·D(to)` is facet `facet` of `from`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub facet: usize,
    pub to: usize,
    pub witness: GroupElement,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VoronoiGraph {
    pub n: usize,
    pub group: GroupKind,
    pub nodes: Vec<PerfectFormRep>,
    /// One record per facet of every node, sorted by `(from, facet)`.
    pub edges: Vec<Edge>,
}

impl VoronoiGraph {
    pub fn edge(&self, from: usize, facet: usize) -> &Edge {
        let k =
            self.edges.binary_search_by_key(&(from, facet), |e| (e.from, e.facet)).expect("every facet has an edge");
        &self.edges[k]
    }

    pub fn class_names(&self) -> Vec<&str> {
        self.nodes.iter().map(|r| r.name.as_str()).collect()
    }

    /// Connectivity of the quotient graph.
    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for e in self.edges.iter().filter(|e| e.from == i) {
                if !seen[e.to] {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Re-express the graph with every representative moved by a seeded random
    /// element of Γ and the nodes shuffled.
    pub fn permuted(&self, seed: u64) -> VoronoiGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.nodes.len();
        // Transforms must lie in Γ, or SL classes and witnesses leave SL_n(Z).
        let flip = {
            let mut d = vec![1i64; self.n];
            d[0] = -1;
            GroupElement::diag(&d).expect("reflection")
        };
        let us: Vec<GroupElement> = (0..k)
            .map(|_| {
                let u = random_unimodular(self.n, &mut rng);
                if self.group == GroupKind::Sl && u.det() == -1 {
                    flip.mul(&u)
                } else {
                    u
                }
            })
            .collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut rng);
        // order[new] = old
        let mut new_of = vec![0; k];
        for (new, &old) in order.iter().enumerate() {
            new_of[old] = new;
        }
        let nodes: Vec<PerfectFormRep> =
            order.iter().map(|&old| self.nodes[old].transform(&us[old], self.nodes[old].name.clone())).collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let (a, b) = (new_of[e.from], new_of[e.to]);
            let face = nodes[a]
                .map_rays(&us[e.from], &self.nodes[e.from], self.nodes[e.from].facets()[e.facet].incident)
                .expect("transformed rays");
            let facet = nodes[a].facet_index(face).expect("transformed facet");
            let witness = us[e.from].mul(&e.witness).mul(&us[e.to].inverse());
            edges.push(Edge { from: a, facet, to: b, witness });
        }
        edges.sort_by_key(|e| (e.from, e.facet));
        VoronoiGraph { n: self.n, group: self.group, nodes, edges }
    }
}

/// A product of random elementary matrices and a random signed permutation.
pub fn random_unimodular(n: usize, rng: &mut impl Rng) -> GroupElement {
    let mut g = GroupElement::identity(n);
    if n < 2 {
        return g;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut r = vec![0; n];
            r[perm[i]] = if rng.gen_bool(0.5) { 1 } else { -1 };
            r
        })
        .collect();
    g = g.mul(&GroupElement::from_rows(&rows).expect("signed permutation"));
    for _ in 0..n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let mut e = GroupElement::identity(n).rows();
        e[i][j] = if rng.gen_bool(0.5) { 1 } else { -1 };
        g = g.mul(&GroupElement::from_rows(&e).expect("elementary matrix"));
    }
    g
}

/// Certificate that `g·h1 = scale·h2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivWitness {
    pub g: GroupElement,
    pub scale: BigRational,
}

fn form_config(h: &QForm, m: &MinVecSet) -> VectorConfig {
    VectorConfig::new(m.vectors.clone(), h.gram().clone())
}

/// A witness that the two perfect forms are `GL_n(Z)`-equivalent up to homothety.
pub fn is_equivalent(h1: &QForm, h2: &QForm) -> Result<Option<EquivWitness>> {
    let m1 = minimum_and_minimal_vectors(h1)?;
    let m2 = minimum_and_minimal_vectors(h2)?;
    Ok(find_isometry(&form_config(h1, &m1), &form_config(h2, &m2))
        .map(|g| EquivWitness { g, scale: BigRational::one() }))
}

/// The stabilizer of the domain of `h` in Γ.
pub fn stabilizer(h: &PerfectFormRep, kind: GroupKind) -> MatGroup {
    let full = automorphism_group(&form_config(&h.form, &h.minvecs));
    match kind {
        GroupKind::Gl => full,
        GroupKind::Sl => full.det_one_part(),
    }
}

/// Stabilizer in Γ of the face spanned by `x xᵀ`, `x ∈ face` (which must span `Qⁿ`).
pub fn facet_stabilizer(face: &[Vec<i64>], kind: GroupKind) -> MatGroup {
    let full = automorphism_group(&VectorConfig::for_face(face.to_vec()));
    match kind {
        GroupKind::Gl => full,
        GroupKind::Sl => full.det_one_part(),
    }
}

/// The perfect form across facet `normal` of the domain of `h`: `h + ρN` for
/// the least `ρ > 0` at which new minimal vectors appear.
pub fn neighbor(h: &QForm, minvecs: &MinVecSet, normal: &IntMat) -> Result<QForm> {
    let face: Vec<Vec<i64>> = minvecs.vectors.iter().filter(|x| eval(normal, x).is_zero()).cloned().collect();
    if meets_boundary(&face) {
        return Err(Error::BoundaryFacet);
    }
    let mu = minvecs.min_value.clone();
    let hq = RatMat::from(h.gram());
    let nq = RatMat::from(normal);
    let at = |rho: &BigRational| -> RatMat {
        let n = h.n();
        let mut m = RatMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, hq.get(i, j) + rho * nq.get(i, j));
            }
        }
        m
    };
    // Find ρ at which the form is still positive definite but has vectors below μ.
    let mut lo = BigRational::zero();
    let mut hi = BigRational::one();
    let mut below;
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > 256 {
            return Err(Error::BoundaryFacet);
        }
        match short_vectors(&at(&hi), &mu, true) {
            Err(Error::NotPositiveDefinite) => {
                hi = (&lo + &hi) / BigRational::from_integer(BigInt::from(2));
            }
            Err(e) => return Err(e),
            Ok(v) if v.is_empty() => {
                lo = hi.clone();
                hi = &hi * BigRational::from_integer(BigInt::from(2));
            }
            Ok(v) => {
                below = v;
                break;
            }
        }
    }
    // Shrink ρ to the first value where a new vector reaches μ.
    let mut rho = hi;
    while !below.is_empty() {
        for (v, _) in &below {
            let hv = BigRational::from_integer(eval(h.gram(), v));
            let nv = BigRational::from_integer(eval(normal, v));
            debug_assert!(nv.is_negative());
            let r = (hv - &mu) / -nv;
            if r < rho {
                rho = r;
            }
        }
        below = short_vectors(&at(&rho), &mu, true)?;
    }
    let m = at(&rho);
    let n = h.n();
    let denom = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(BigInt::one(), |acc, (i, j)| num_integer::Integer::lcm(&acc, m.get(i, j).denom()));
    let rows: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| (m.get(i, j) * BigRational::from_integer(denom.clone())).to_integer()).collect())
        .collect();
    let result = QForm::new(IntMat::from_rows(rows))?;
    let mv = minimum_and_minimal_vectors(&result)?;
    if !is_perfect(&mv) || mv.len() <= face.len() || !face.iter().all(|x| mv.vectors.contains(x)) {
        return Err(Error::Inconsistent("neighbour step did not produce a perfect neighbour".into()));
    }
    Ok(result)
}

/// Order in which the class frontier is explored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Traversal {
    BreadthFirst,
    /// Depth-first, visiting facet orbits in reverse order.
    DepthFirstReversed,
}

/// Rewrite `h` in a basis of minimal vectors when one exists.
///
/// Returns the new form and `w` with `w·new = h`.
fn reduce(h: &QForm) -> Result<(QForm, GroupElement)> {
    let m = minimum_and_minimal_vectors(h)?;
    let n = h.n();
    let mut best: Option<GroupElement> = None;
    let k = m.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tries = 0usize;
    if k >= n {
        'outer: loop {
            tries += 1;
            let rows: Vec<Vec<i64>> = idx.iter().map(|&i| m.vectors[i].clone()).collect();
            if let Ok(b) = GroupElement::from_rows(&rows) {
                best = Some(b);
                break 'outer;
            }
            if tries > 200_000 {
                break;
            }
            let Some(i) = (0..n).rev().find(|&i| idx[i] < k - n + i) else {
                break;
            };
            idx[i] += 1;
            for j in i + 1..n {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    match best {
        Some(b) => {
            let new = h.rebase(&b);
            let w = b.transpose();
            debug_assert_eq!(new.act(&w), *h);
            Ok((new, w))
        }
        None => Ok((h.clone(), GroupElement::identity(n))),
    }
}

/// Enumerate perfect forms of rank `n` up to Γ-equivalence, starting from `A_n`.
pub fn enumerate_perfect_forms(n: usize, kind: GroupKind) -> Result<VoronoiGraph> {
    enumerate_with(n, kind, Traversal::BreadthFirst)
}

pub fn enumerate_with(n: usize, kind: GroupKind, traversal: Traversal) -> Result<VoronoiGraph> {
    if !(1..=7).contains(&n) {
        return Err(Error::UnsupportedRank(n, "1..=7"));
    }
    let gl = enumerate_gl(n, traversal)?;
    let gl = name_classes(gl)?;
    match kind {
        GroupKind::Gl => Ok(gl),
        GroupKind::Sl => Ok(split_sl(&gl)),
    }
}

fn enumerate_gl(n: usize, traversal: Traversal) -> Result<VoronoiGraph> {
    let mut nodes = vec![PerfectFormRep::new("A", QForm::a_n(n))?];
    let mut edges: Vec<Edge> = Vec::new();
    if n == 1 {
        // The single ray has only the apex as a face.
        return Ok(VoronoiGraph { n, group: GroupKind::Gl, nodes, edges });
    }
    let mut frontier: VecDeque<usize> = VecDeque::from([0]);
    while let Some(i) = match traversal {
        Traversal::BreadthFirst => frontier.pop_front(),
        Traversal::DepthFirstReversed => frontier.pop_back(),
    } {
        let orbits = nodes[i].facet_orbits();
        debug!("class {i}: {} facets in {} orbits", nodes[i].facets().len(), orbits.len());
        let cell = &nodes[i];
        let neighbours: Vec<Result<QForm>> = orbits
            .par_iter()
            .map(|orbit| neighbor(&cell.form, &cell.minvecs, &cell.facets()[orbit[0].0].normal))
            .collect();
        let mut order: Vec<usize> = (0..orbits.len()).collect();
        if traversal == Traversal::DepthFirstReversed {
            order.reverse();
        }
        for o in order {
            let h2 = neighbours[o].as_ref().map_err(|e| Error::Inconsistent(e.to_string()))?.clone();
            let m2 = minimum_and_minimal_vectors(&h2)?;
            let target = form_config(&h2, &m2);
            let known = nodes
                .iter()
                .enumerate()
                .find_map(|(j, r)| find_isometry(&form_config(&r.form, &r.minvecs), &target).map(|g| (j, g)));
            let (j, w) = match known {
                Some(found) => found,
                None => {
                    let (rep, w) = reduce(&h2)?;
                    let j = nodes.len();
                    info!("new perfect form class #{j}: {rep}");
                    nodes.push(PerfectFormRep::new("P", rep)?);
                    frontier.push_back(j);
                    (j, w)
                }
            };
            for (f, s) in &orbits[o] {
                edges.push(Edge { from: i, facet: *f, to: j, witness: s.mul(&w) });
            }
        }
    }
    edges.sort_by_key(|e| (e.from, e.facet));
    Ok(VoronoiGraph { n, group: GroupKind::Gl, nodes, edges })
}

/// `A{n}`, `D{n}` for root lattices, `P{n}-{k}` for the others in discovery order.
fn name_classes(mut g: VoronoiGraph) -> Result<VoronoiGraph> {
    let n = g.n;
    let d = if n >= 4 { Some(QForm::d_n(n)) } else { None };
    let mut k = 0;
    for node in &mut g.nodes {
        node.name = if is_equivalent(&node.form, &QForm::a_n(n))?.is_some() {
            format!("A{n}")
        } else if d.as_ref().map(|d| is_equivalent(&node.form, d)).transpose()?.flatten().is_some() {
            format!("D{n}")
        } else {
            k += 1;
            format!("P{n}-{k}")
        };
    }
    Ok(g)
}

/// Split GL classes into SL classes.
///
/// A class whose stabilizer has a determinant −1 element stays one class;
/// otherwise it splits into `h` and `r·h` with `r = diag(−1, 1, …, 1)`.
fn split_sl(gl: &VoronoiGraph) -> VoronoiGraph {
    let n = gl.n;
    let r = {
        let mut d = vec![1i64; n];
        d[0] = -1;
        GroupElement::diag(&d).expect("reflection")
    };
    // SL node index for (GL class, copy), copy 0 = h, 1 = r·h.
    let mut sl_index: Vec<[Option<usize>; 2]> = Vec::new();
    let mut nodes: Vec<PerfectFormRep> = Vec::new();
    let mut copies: Vec<(usize, GroupElement)> = Vec::new();
    let mut minus_one: Vec<Option<GroupElement>> = Vec::new();
    for (i, rep) in gl.nodes.iter().enumerate() {
        let s = rep.stabilizer.iter().find(|g| g.det() == -1).cloned();
        let mut idx = [None, None];
        let mut base = rep.clone();
        base.stabilizer = rep.stabilizer.det_one_part();
        idx[0] = Some(nodes.len());
        nodes.push(base);
        copies.push((i, GroupElement::identity(n)));
        if s.is_none() {
            let mut other = rep.transform(&r, format!("{}'", rep.name));
            other.stabilizer = other.stabilizer.det_one_part();
            idx[1] = Some(nodes.len());
            nodes.push(other);
            copies.push((i, r.clone()));
        }
        sl_index.push(idx);
        minus_one.push(s);
    }
    let mut edges = Vec::new();
    for (a, (i, t)) in copies.iter().enumerate() {
        for f in 0..gl.nodes[*i].facets().len() {
            let e = gl.edge(*i, f);
            let face = nodes[a].map_rays(t, &gl.nodes[*i], gl.nodes[*i].facets()[f].incident).expect("copy rays");
            let facet = nodes[a].facet_index(face).expect("copy facet");
            // Neighbour cell is t·w·D_j; adjust to a determinant 1 witness.
            let g = t.mul(&e.witness);
            let (to, witness) = if g.det() == 1 {
                (sl_index[e.to][0].expect("base copy"), g)
            } else if let Some(s) = &minus_one[e.to] {
                (sl_index[e.to][0].expect("base copy"), g.mul(s))
            } else {
                (sl_index[e.to][1].expect("split copy"), g.mul(&r.inverse()))
            };
            edges.push(Edge { from: a, facet, to, witness });
        }
    }
    edges.sort_by_key(|e| (e.from, e.facet));
    VoronoiGraph { n, group: GroupKind::Sl, nodes, edges }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a2_neighbour_is_a2() {
        let rep = PerfectFormRep::new("A2", QForm::a_n(2)).unwrap();
        for f in rep.facets() {
            let h = neighbor(&rep.form, &rep.minvecs, &f.normal).unwrap();
            assert!(is_equivalent(&h, &rep.form).unwrap().is_some());
            assert_ne!(h, rep.form);
        }
    }

    #[test]
    fn boundary_facet_is_rejected() {
        // The face {e1} of a cone is not a facet, but any normal vanishing only on
        // rank-deficient vectors must be refused.
        let h = QForm::from_i64_rows(&[[2, 1], [1, 2]]).unwrap();
        let m = minimum_and_minimal_vectors(&h).unwrap();
        let n = IntMat::from_i64_rows(&[[0, 0], [0, 1]]);
        assert!(matches!(neighbor(&h, &m, &n), Err(Error::BoundaryFacet)));
    }

    #[test]
    fn small_enumerations() {
        for n in [2, 3] {
            let g = enumerate_perfect_forms(n, GroupKind::Gl).unwrap();
            assert_eq!(g.class_names(), vec![format!("A{n}").as_str()]);
            assert!(g.is_connected());
        }
        let sl2 = enumerate_perfect_forms(2, GroupKind::Sl).unwrap();
        assert_eq!(sl2.nodes.len(), 1);
        assert_eq!(sl2.nodes[0].stab_order(), 6);
    }

    #[test]
    fn edges_glue_cells_along_facets() {
        let g = enumerate_perfect_forms(3, GroupKind::Sl).unwrap();
        for e in &g.edges {
            let from = &g.nodes[e.from];
            let to = &g.nodes[e.to];
            assert_eq!(e.witness.det(), 1);
            let images: Vec<Vec<i64>> =
                to.minvecs.vectors.iter().map(|x| canonical_sign(&e.witness.apply(x))).collect();
            let shared: RaySet =
                (0..from.minvecs.len()).filter(|&i| images.contains(&from.minvecs.vectors[i])).collect();
            assert_eq!(shared, from.facets()[e.facet].incident);
        }
    }

    #[test]
    fn stabilizer_kinds() {
        let rep = PerfectFormRep::new("A2", QForm::a_n(2)).unwrap();
        assert_eq!(stabilizer(&rep, GroupKind::Gl).order(), 12);
        assert_eq!(stabilizer(&rep, GroupKind::Sl).order(), 6);
        let o2 = facet_stabilizer(&[vec![1, 0], vec![0, 1]], GroupKind::Gl);
        assert_eq!(o2.order(), 8);
    }

    #[test]
    fn permuted_graph_stays_in_gamma() {
        let g = enumerate_perfect_forms(4, GroupKind::Sl).unwrap();
        for seed in 0..8 {
            let p = g.permuted(seed);
            assert!(p.edges.iter().all(|e| e.witness.det() == 1));
            assert!(p.is_connected());
            let mut names = p.class_names();
            names.sort_unstable();
            assert_eq!(names, ["A4", "D4"]);
        }
    }
}
