//! The composite `d_{d(n)−1} ∘ d_{d(n)}` on the top three degrees.
//!
//! Codimension-2 faces avoiding the boundary are grouped into Γ-orbits by
//! moving them inside a cell by its stabilizer and across the facets that
//! contain them. Orientations follow the same transport convention as for
//! facets. Since few codim-2 orbits survive the orientation filter in small
//! rank, the composite is also checked cell by cell on the unquotiented face
//! lattice of each top cone, with the same sign convention.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::complex::{ambient_sign, flat, orientation_preserved, Differential, VoronoiComplex};
use crate::cone::{meets_boundary, RaySet};
use crate::error::Result;
use crate::forms::sym_dim;
use crate::group::GroupElement;
use crate::linalg::{independent_subset, relative_orientation, Sign};
use crate::perfect::{facet_stabilizer, PerfectFormRep};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DdReport {
    /// All boundary-avoiding codim-2 orbits, kept or not.
    pub ridge_orbits_total: usize,
    /// Kept codim-2 orbits (rows of the lower differential).
    pub ridge_orbits: usize,
    /// `d_{d(n)−1}`: rows kept ridge orbits, columns kept facet orbits.
    pub lower: Differential,
    /// Nonzero entries of the composite, `(row, col, value)`.
    pub product_nonzero: Vec<(usize, usize, i64)>,
    /// Per top cell, the cellular composite on its own face lattice vanishes.
    pub local: Vec<(String, bool)>,
    pub holds: bool,
}

/// Boundary maps of a single top cone on its facets and codim-2 faces, with
/// the cone carrying the ambient orientation and each face the orientation of
/// an independent subset of its rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalBoundary {
    pub facets: Vec<RaySet>,
    pub ridges: Vec<RaySet>,
    /// `[σ:τ]` per facet.
    pub upper: Vec<i64>,
    /// `[τ:ω]`, rows ridges, columns facets.
    pub lower: Differential,
}

impl LocalBoundary {
    pub fn new(cell: &PerfectFormRep) -> Result<Self> {
        let d = sym_dim(cell.n());
        let basis_of = |face: RaySet| -> Vec<Vec<i64>> {
            let vectors = cell.domain.face_vectors(face);
            independent_subset(&flat(&vectors), d).into_iter().map(|i| vectors[i].clone()).collect()
        };
        let first_off = |outer: RaySet, inner: RaySet| -> Vec<i64> {
            let k = outer.minus(inner).iter().next().expect("proper face");
            cell.minvecs.vectors[k].clone()
        };
        let facets: Vec<RaySet> = cell.facets().iter().map(|f| f.incident).collect();
        let bases: Vec<Vec<Vec<i64>>> = facets.iter().map(|&f| basis_of(f)).collect();
        let upper = facets
            .iter()
            .zip(&bases)
            .map(|(&f, b)| ambient_sign(b, &first_off(cell.domain.all(), f)).value())
            .collect();
        let ridges = cell.domain.faces_of_codim(2);
        let mut rows = Vec::with_capacity(ridges.len());
        for &w in &ridges {
            let mut oriented = basis_of(w);
            oriented.push(Vec::new());
            let mut row = vec![0i64; facets.len()];
            for (k, &f) in facets.iter().enumerate() {
                if w.is_subset(f) {
                    *oriented.last_mut().expect("nonempty") = first_off(f, w);
                    row[k] = relative_orientation(&flat(&bases[k]), &flat(&oriented))?.value();
                }
            }
            rows.push(row);
        }
        let lower = Differential::from_dense(&rows, facets.len());
        Ok(LocalBoundary { facets, ridges, upper, lower })
    }

    pub fn composite_vanishes(&self) -> bool {
        (0..self.lower.rows).all(|r| self.lower.row(r).iter().map(|&(k, v)| v * self.upper[k]).sum::<i64>() == 0)
    }
}

struct Member {
    cell: usize,
    face: RaySet,
    transport: GroupElement,
}

/// Γ-orbits of boundary-avoiding codim-2 faces of all top cells.
fn ridge_orbits(c: &VoronoiComplex) -> Vec<Vec<Member>> {
    let graph = &c.graph;
    let gens: Vec<Vec<GroupElement>> = graph.nodes.iter().map(|r| r.stabilizer.generators()).collect();
    let mut seen: HashMap<(usize, RaySet), ()> = HashMap::new();
    let mut orbits = Vec::new();
    for (i, node) in graph.nodes.iter().enumerate() {
        for face in node.domain.faces_of_codim(2) {
            if meets_boundary(&node.domain.face_vectors(face)) || seen.contains_key(&(i, face)) {
                continue;
            }
            seen.insert((i, face), ());
            let mut members = vec![Member { cell: i, face, transport: GroupElement::identity(c.n) }];
            let mut queue = VecDeque::from([0usize]);
            while let Some(x) = queue.pop_front() {
                let (ci, fi, g) = (members[x].cell, members[x].face, members[x].transport.clone());
                let cell = &graph.nodes[ci];
                let mut moves: Vec<(usize, RaySet, GroupElement)> = gens[ci]
                    .iter()
                    .map(|s| (ci, cell.map_rays(s, cell, fi).expect("stabilizer permutes rays"), s.mul(&g)))
                    .collect();
                for (k, f) in cell.facets().iter().enumerate() {
                    if !fi.is_subset(f.incident) {
                        continue;
                    }
                    let e = graph.edge(ci, k);
                    let winv = e.witness.inverse();
                    let img = graph.nodes[e.to].map_rays(&winv, cell, fi).expect("ridge lies in the neighbour");
                    moves.push((e.to, img, winv.mul(&g)));
                }
                for (c2, f2, t) in moves {
                    if let std::collections::hash_map::Entry::Vacant(v) = seen.entry((c2, f2)) {
                        v.insert(());
                        queue.push_back(members.len());
                        members.push(Member { cell: c2, face: f2, transport: t });
                    }
                }
            }
            orbits.push(members);
        }
    }
    orbits
}

/// Build `d_{d(n)−1}` and check `d_{d(n)−1} ∘ d_{d(n)} = 0` exactly.
pub fn dd_sanity(c: &VoronoiComplex) -> Result<DdReport> {
    let graph = &c.graph;
    let d = sym_dim(c.n);
    let mut rows: Vec<Vec<i64>> = Vec::new();
    let orbits = ridge_orbits(c);
    let ridge_orbits_total = orbits.len();
    for members in orbits {
        let rep = &members[0];
        let cell = &graph.nodes[rep.cell];
        let vectors = cell.domain.face_vectors(rep.face);
        let idx = independent_subset(&flat(&vectors), d);
        let basis: Vec<Vec<i64>> = idx.into_iter().map(|i| vectors[i].clone()).collect();
        let stab = facet_stabilizer(&vectors, c.group);
        if !orientation_preserved(&stab, &basis)? {
            continue;
        }
        // [τ:ω] for every kept facet orbit τ, summing over the faces of its representative.
        let mut row = Vec::with_capacity(c.row_orbits.len());
        for &t in &c.row_orbits {
            let tau = &c.facets[t];
            let tcell = &graph.nodes[tau.cell];
            let tface = tcell.facets()[tau.facet].incident;
            let mut sum = 0i64;
            for m in members.iter().filter(|m| m.cell == tau.cell && m.face.is_subset(tface)) {
                let image: Vec<Vec<i64>> = basis.iter().map(|x| m.transport.apply(x)).collect();
                let v = tface.minus(m.face).iter().next().expect("facet is larger than ridge");
                let mut oriented = image;
                oriented.push(tcell.minvecs.vectors[v].clone());
                let s = relative_orientation(&flat(&tau.basis), &flat(&oriented))?;
                sum += match s {
                    Sign::Pos => 1,
                    Sign::Neg => -1,
                    Sign::Zero => 0,
                };
            }
            row.push(sum);
        }
        rows.push(row);
    }
    let lower = Differential::from_dense(&rows, c.row_orbits.len());
    let upper = c.differential.to_dense();
    let mut product_nonzero = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        for col in 0..c.differential.cols {
            let v: i64 = row.iter().zip(&upper).map(|(a, u)| a * u[col]).sum();
            if v != 0 {
                product_nonzero.push((r, col, v));
            }
        }
    }
    let mut local = Vec::with_capacity(graph.nodes.len());
    for node in &graph.nodes {
        local.push((node.name.clone(), LocalBoundary::new(node)?.composite_vanishes()));
    }
    let holds = product_nonzero.is_empty() && local.iter().all(|(_, ok)| *ok);
    Ok(DdReport { ridge_orbits_total, ridge_orbits: rows.len(), lower, local, holds, product_nonzero })
}

/// The composite with a given top differential substituted, for mutation tests.
pub fn composite_vanishes(lower: &Differential, upper: &Differential) -> bool {
    let (l, u) = (lower.to_dense(), upper.to_dense());
    (0..lower.rows).all(|r| (0..upper.cols).all(|c| (0..upper.rows).map(|k| l[r][k] * u[k][c]).sum::<i64>() == 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, ComplexOptions};
    use crate::perfect::{enumerate_perfect_forms, GroupKind};

    #[test]
    fn n3_vacuous_and_local() {
        let g = enumerate_perfect_forms(3, GroupKind::Sl).unwrap();
        let c = build_complex(&g, ComplexOptions::default()).unwrap();
        let r = dd_sanity(&c).unwrap();
        assert_eq!(r.ridge_orbits, 0);
        assert!(r.holds);
        assert_eq!(r.local, vec![("A3".to_string(), true)]);
    }

    #[test]
    fn local_sign_flip_breaks_composite() {
        let g = enumerate_perfect_forms(3, GroupKind::Gl).unwrap();
        let mut lb = LocalBoundary::new(&g.nodes[0]).unwrap();
        // The simplex on 6 rays: 6 facets, 15 codim-2 faces, each in two facets.
        assert_eq!((lb.facets.len(), lb.ridges.len()), (6, 15));
        assert!((0..lb.lower.rows).all(|r| lb.lower.row(r).len() == 2));
        assert!(lb.composite_vanishes());
        lb.upper[2] = -lb.upper[2];
        assert!(!lb.composite_vanishes());
    }

    #[test]
    fn mutated_upper_detected() {
        let lower = Differential::from_dense(&[vec![1, 1]], 2);
        let upper = Differential::from_dense(&[vec![3], vec![-3]], 1);
        assert!(composite_vanishes(&lower, &upper));
        let flipped = Differential::from_dense(&[vec![3], vec![3]], 1);
        assert!(!composite_vanishes(&lower, &flipped));
    }
}
