//! The top two degrees of the Voronoi complex of Γ: orbit representatives of
//! top cells and of their facets, orientation data, incidence numbers and the
//! top differential.
//!
//! Orientation conventions: a top cell carries the orientation of the space of
//! symmetric matrices (upper-triangle coordinates, in order). A facet orbit
//! representative `τ ⊂ σ` carries an ordered basis `ℬ` of rays such that
//! `ℬ ∪ {v}` is positive for `v ∈ m(σ) \ m(τ)`, and every translate `g·τ`
//! carries `g·ℬ`.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::meets_boundary;
use crate::error::{Error, Result};
use crate::forms::{ambient_orientation_sign, rank_one_flat, sym_dim};
use crate::group::{canonical_sign, GroupElement, MatGroup};
use crate::linalg::{det_sign_int, independent_subset, relative_orientation, Sign};
use crate::perfect::{facet_stabilizer, GroupKind, PerfectFormRep, VoronoiGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacetKind {
    SelfIntersecting,
    NonSelfIntersecting,
}

/// A top-cell orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopCell {
    /// Index of the representative in the Voronoi graph.
    pub node: usize,
    pub name: String,
    pub stab_order: usize,
    /// No stabilizer element reverses the ambient orientation.
    pub kept: bool,
}

/// A facet `(cell, facet)` of some top-cell representative, with an element
/// `transport` mapping the orbit representative onto it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetMember {
    pub cell: usize,
    pub facet: usize,
    pub transport: GroupElement,
    /// A second, independently found element with the same effect, if any.
    pub alt: Option<GroupElement>,
}

/// A Γ-orbit of facets, represented as `τ = σ ∩ γ·ρ` with `σ` its containing cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetOrbit {
    pub cell: usize,
    pub facet: usize,
    pub vectors: Vec<Vec<i64>>,
    pub other: usize,
    pub witness: GroupElement,
    pub kind: FacetKind,
    pub stab_order: usize,
    pub stabilizer: Option<MatGroup>,
    /// Ordered basis of `R(τ)`, as vectors `x` standing for the rays `x xᵀ`.
    pub basis: Vec<Vec<i64>>,
    pub kept: bool,
    pub members: Vec<FacetMember>,
}

impl FacetOrbit {
    pub fn stabilizer(&self) -> &MatGroup {
        self.stabilizer.as_ref().expect("stabilizer is computed")
    }
}

/// Sparse integer matrix of incidence numbers; rows are kept facet orbits,
/// columns kept top cells.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Differential {
    pub rows: usize,
    pub cols: usize,
    /// `(row, col, value)`, nonzero values only, sorted.
    pub entries: Vec<(usize, usize, i64)>,
}

impl Differential {
    pub fn from_dense(dense: &[Vec<i64>], cols: usize) -> Self {
        let mut entries = Vec::new();
        for (r, row) in dense.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    entries.push((r, c, v));
                }
            }
        }
        Differential { rows: dense.len(), cols, entries }
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries.iter().find(|e| e.0 == r && e.1 == c).map_or(0, |e| e.2)
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            m[r][c] = v;
        }
        m
    }

    pub fn row(&self, r: usize) -> Vec<(usize, i64)> {
        self.entries.iter().filter(|e| e.0 == r).map(|e| (e.1, e.2)).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VoronoiComplex {
    pub n: usize,
    pub group: GroupKind,
    pub graph: VoronoiGraph,
    pub cells: Vec<TopCell>,
    pub facets: Vec<FacetOrbit>,
    /// `[σ:τ]` for every kept facet orbit (outer index) and every top cell.
    pub incidence: Vec<Option<Vec<i64>>>,
    pub differential: Differential,
    /// Facet orbit index of each differential row.
    pub row_orbits: Vec<usize>,
    /// Cell index of each differential column.
    pub col_cells: Vec<usize>,
}

impl VoronoiComplex {
    pub fn kept_cells(&self) -> impl Iterator<Item = &TopCell> {
        self.cells.iter().filter(|c| c.kept)
    }

    pub fn kept_facets(&self) -> impl Iterator<Item = &FacetOrbit> {
        self.facets.iter().filter(|f| f.kept)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexOptions {
    /// Randomizes the choice of facet representatives within the first cell.
    pub seed: Option<u64>,
}

pub(crate) fn flat(vectors: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    vectors.iter().map(|x| rank_one_flat(x)).collect()
}

fn apply_all(g: &GroupElement, vectors: &[Vec<i64>]) -> Vec<Vec<i64>> {
    vectors.iter().map(|x| g.apply(x)).collect()
}

/// Sign of the determinant of `[ℬ; v]` in the ambient coordinates.
pub fn ambient_sign(basis: &[Vec<i64>], v: &[i64]) -> Sign {
    let mut rows = flat(basis);
    rows.push(rank_one_flat(v));
    det_sign_int(rows)
}

/// Whether every element of `g` maps `basis` to a positively oriented basis of its span.
pub fn orientation_preserved(group: &MatGroup, basis: &[Vec<i64>]) -> Result<bool> {
    let b = flat(basis);
    for g in group.iter() {
        if relative_orientation(&b, &flat(&apply_all(g, basis)))? != Sign::Pos {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ε(σ, τ')`: orientation of `ℬ' ∪ {v}` for the facet `facet` of `cell`, where
/// `basis` orders `R(τ')` and `v` is the `v_choice`-th ray of the cell off the
/// facet (the first one when `None`).
pub fn epsilon(cell: &PerfectFormRep, facet: usize, basis: &[Vec<i64>], v_choice: Option<usize>) -> Result<Sign> {
    let incident = cell.facets()[facet].incident;
    let off: Vec<usize> = cell.domain.all().minus(incident).iter().collect();
    let v = off.get(v_choice.unwrap_or(0)).ok_or_else(|| Error::IndexOutOfRange("no such ray off the facet".into()))?;
    let s = ambient_sign(basis, &cell.minvecs.vectors[*v]);
    if s.is_zero() {
        return Err(Error::SpanMismatch("basis does not span the facet".into()));
    }
    Ok(s)
}

/// `η(τ, τ')`: orientation of `γ·ℬ` relative to the reference basis of `τ' = γ·τ`.
pub fn eta(
    tau_vectors: &[Vec<i64>],
    tau_basis: &[Vec<i64>],
    prime_vectors: &[Vec<i64>],
    prime_basis: &[Vec<i64>],
    gamma: &GroupElement,
) -> Result<Sign> {
    let mut image: Vec<Vec<i64>> = tau_vectors.iter().map(|x| canonical_sign(&gamma.apply(x))).collect();
    let mut target: Vec<Vec<i64>> = prime_vectors.iter().map(|x| canonical_sign(x)).collect();
    image.sort();
    target.sort();
    if image != target {
        return Err(Error::WitnessMismatch);
    }
    relative_orientation(&flat(prime_basis), &flat(&apply_all(gamma, tau_basis)))
}

/// Ordered basis of a facet's span from its rays, oriented so that the
/// containing cell induces it.
pub fn induced_basis(cell: &PerfectFormRep, facet: usize) -> Vec<Vec<i64>> {
    let vectors = cell.domain.face_vectors(cell.facets()[facet].incident);
    let idx = independent_subset(&flat(&vectors), sym_dim(cell.n()));
    let mut basis: Vec<Vec<i64>> = idx.into_iter().map(|i| vectors[i].clone()).collect();
    if epsilon(cell, facet, &basis, None).expect("independent basis") == Sign::Neg {
        basis.swap(0, 1);
    }
    basis
}

/// The facet of `to` that is `g⁻¹·(facet of from)` where `from ∩ g·to` is that facet.
fn cross_facet(graph: &VoronoiGraph, from: usize, facet: usize) -> (usize, usize, GroupElement) {
    let e = graph.edge(from, facet);
    let winv = e.witness.inverse();
    let rays = graph.nodes[e.to]
        .map_rays(&winv, &graph.nodes[from], graph.nodes[from].facets()[facet].incident)
        .expect("glued facet lies in the neighbour");
    let k = graph.nodes[e.to].facet_index(rays).expect("glued facet is a facet of the neighbour");
    (e.to, k, winv)
}

/// Γ-orbits of all facets of all cells, each with transports from its first member.
fn facet_orbit_members(graph: &VoronoiGraph) -> Vec<Vec<FacetMember>> {
    let gens: Vec<Vec<GroupElement>> = graph.nodes.iter().map(|r| r.stabilizer.generators()).collect();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut orbits: Vec<Vec<FacetMember>> = Vec::new();
    for (i, node) in graph.nodes.iter().enumerate() {
        for k in 0..node.facets().len() {
            if seen.contains_key(&(i, k)) {
                continue;
            }
            let o = orbits.len();
            let mut members =
                vec![FacetMember { cell: i, facet: k, transport: GroupElement::identity(graph.n), alt: None }];
            seen.insert((i, k), 0);
            let mut queue = VecDeque::from([0usize]);
            while let Some(x) = queue.pop_front() {
                let (c, f, g) = (members[x].cell, members[x].facet, members[x].transport.clone());
                let cell = &graph.nodes[c];
                let mut moves: Vec<(usize, usize, GroupElement)> = gens[c]
                    .iter()
                    .map(|s| {
                        let img = cell
                            .map_rays(s, cell, cell.facets()[f].incident)
                            .and_then(|r| cell.facet_index(r))
                            .expect("stabilizer permutes facets");
                        (c, img, s.mul(&g))
                    })
                    .collect();
                let (c2, f2, w) = cross_facet(graph, c, f);
                moves.push((c2, f2, w.mul(&g)));
                for (c2, f2, t) in moves {
                    match seen.get(&(c2, f2)) {
                        Some(&y) => {
                            let m = &mut members[y];
                            if m.alt.is_none() && m.transport != t {
                                m.alt = Some(t);
                            }
                        }
                        None => {
                            seen.insert((c2, f2), members.len());
                            queue.push_back(members.len());
                            members.push(FacetMember { cell: c2, facet: f2, transport: t, alt: None });
                        }
                    }
                }
            }
            debug_assert!(o == orbits.len());
            orbits.push(members);
        }
    }
    orbits
}

fn sorted_face(cell: &PerfectFormRep, facet: usize) -> Vec<Vec<i64>> {
    let mut v = cell.domain.face_vectors(cell.facets()[facet].incident);
    v.sort();
    v
}

/// Build `Σ*` and `Σ` in the top two degrees and the top differential.
pub fn build_complex(graph: &VoronoiGraph, opts: ComplexOptions) -> Result<VoronoiComplex> {
    let n = graph.n;
    let kind = graph.group;
    if kind == GroupKind::Sl && graph.edges.iter().any(|e| e.witness.det() != 1) {
        return Err(Error::Inconsistent("an edge witness of an SL graph has determinant -1".into()));
    }
    for node in graph.nodes.iter().filter(|_| n > 1) {
        for f in node.facets() {
            if meets_boundary(&node.domain.face_vectors(f.incident)) {
                return Err(Error::Inconsistent(format!("a facet of {} meets the boundary", node.name)));
            }
        }
    }
    let cells: Vec<TopCell> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, r)| TopCell {
            node: i,
            name: r.name.clone(),
            stab_order: r.stab_order(),
            kept: r.stabilizer.iter().all(|g| ambient_orientation_sign(g) == Sign::Pos),
        })
        .collect();

    let mut rng = opts.seed.map(ChaCha8Rng::seed_from_u64);
    let mut facets = Vec::new();
    let orbits = if n > 1 { facet_orbit_members(graph) } else { Vec::new() };
    for mut members in orbits {
        // Representative: a facet of the first-listed cell, lexicographically least m(τ).
        let first_cell = members.iter().map(|m| m.cell).min().expect("nonempty orbit");
        let mut candidates: Vec<usize> = (0..members.len()).filter(|&x| members[x].cell == first_cell).collect();
        candidates.sort_by_key(|&x| sorted_face(&graph.nodes[first_cell], members[x].facet));
        let rep = match rng.as_mut() {
            Some(r) => *candidates.choose(r).expect("nonempty"),
            None => candidates[0],
        };
        let back = members[rep].transport.inverse();
        for m in &mut members {
            m.transport = m.transport.mul(&back);
            m.alt = m.alt.as_ref().map(|a| a.mul(&back));
        }
        members.sort_by_key(|m| (m.cell, m.facet));
        let rep_member = members
            .iter()
            .find(|m| m.cell == first_cell && m.transport.is_identity())
            .expect("representative present")
            .clone();
        let cell = &graph.nodes[rep_member.cell];
        let vectors = cell.domain.face_vectors(cell.facets()[rep_member.facet].incident);
        let e = graph.edge(rep_member.cell, rep_member.facet);
        let stabilizer = facet_stabilizer(&vectors, kind);
        let basis = induced_basis(cell, rep_member.facet);
        let kept = orientation_preserved(&stabilizer, &basis)?;
        facets.push(FacetOrbit {
            cell: rep_member.cell,
            facet: rep_member.facet,
            vectors,
            other: e.to,
            witness: e.witness.clone(),
            kind: if e.to == rep_member.cell { FacetKind::SelfIntersecting } else { FacetKind::NonSelfIntersecting },
            stab_order: stabilizer.order(),
            stabilizer: Some(stabilizer),
            basis,
            kept,
            members,
        });
    }
    facets.sort_by(|a, b| (a.cell, &a.vectors).cmp(&(b.cell, &b.vectors)));

    let incidence: Vec<Option<Vec<i64>>> = facets
        .iter()
        .map(|t| if t.kept { Some(incidence_row(graph, t)).transpose() } else { Ok(None) })
        .collect::<Result<_>>()?;
    let col_cells: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].kept).collect();
    let row_orbits: Vec<usize> = (0..facets.len()).filter(|&t| facets[t].kept).collect();
    let dense: Vec<Vec<i64>> = row_orbits
        .iter()
        .map(|&t| {
            let row = incidence[t].as_ref().expect("kept orbit has incidences");
            col_cells.iter().map(|&c| row[c]).collect()
        })
        .collect();
    let differential = Differential::from_dense(&dense, col_cells.len());
    Ok(VoronoiComplex {
        n,
        group: kind,
        graph: graph.clone(),
        cells,
        facets,
        incidence,
        differential,
        row_orbits,
        col_cells,
    })
}

/// `[σ:τ]` for every top cell `σ`: the sum of `η(τ,τ')·ε(σ,τ')` over facets
/// `τ'` of `σ` in the orbit of `τ`.
fn incidence_row(graph: &VoronoiGraph, t: &FacetOrbit) -> Result<Vec<i64>> {
    let mut row = vec![0i64; graph.nodes.len()];
    for m in &t.members {
        let cell = &graph.nodes[m.cell];
        let reference = apply_all(&m.transport, &t.basis);
        let prime_vectors = cell.domain.face_vectors(cell.facets()[m.facet].incident);
        let via = m.alt.as_ref().unwrap_or(&m.transport);
        let h = eta(&t.vectors, &t.basis, &prime_vectors, &reference, via)?;
        let e = epsilon(cell, m.facet, &reference, None)?;
        row[m.cell] += (h * e).value();
    }
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perfect::enumerate_perfect_forms;

    #[test]
    fn n2_and_n3_have_no_kept_facets() {
        for n in [2, 3] {
            let g = enumerate_perfect_forms(n, GroupKind::Sl).unwrap();
            let c = build_complex(&g, ComplexOptions::default()).unwrap();
            assert_eq!(c.cells.len(), 1);
            assert!(c.cells[0].kept);
            assert_eq!(c.facets.len(), 1);
            assert_eq!(c.facets[0].kind, FacetKind::SelfIntersecting);
            assert!(!c.facets[0].kept);
            assert_eq!(c.differential.rows, 0);
        }
    }

    #[test]
    fn gl2_top_cell_is_dropped() {
        let g = enumerate_perfect_forms(2, GroupKind::Gl).unwrap();
        let c = build_complex(&g, ComplexOptions::default()).unwrap();
        assert!(!c.cells[0].kept);
    }

    #[test]
    fn epsilon_is_independent_of_v() {
        let g = enumerate_perfect_forms(3, GroupKind::Gl).unwrap();
        let cell = &g.nodes[0];
        let mut signs = Vec::new();
        for f in 0..cell.facets().len() {
            let basis = induced_basis(cell, f);
            let off = cell.domain.all().minus(cell.facets()[f].incident).len();
            for v in 0..off {
                assert_eq!(epsilon(cell, f, &basis, Some(v)).unwrap(), Sign::Pos);
            }
            let mut swapped = basis.clone();
            swapped.swap(0, 1);
            signs.push(epsilon(cell, f, &swapped, None).unwrap());
        }
        assert!(signs.iter().all(|&s| s == Sign::Neg));
    }

    #[test]
    fn eta_identity_and_mismatch() {
        let g = enumerate_perfect_forms(3, GroupKind::Gl).unwrap();
        let cell = &g.nodes[0];
        let basis = induced_basis(cell, 0);
        let vectors = cell.domain.face_vectors(cell.facets()[0].incident);
        let id = GroupElement::identity(3);
        assert_eq!(eta(&vectors, &basis, &vectors, &basis, &id).unwrap(), Sign::Pos);
        let other = cell.domain.face_vectors(cell.facets()[1].incident);
        assert!(matches!(eta(&vectors, &basis, &other, &basis, &id), Err(Error::WitnessMismatch)));
    }
}
