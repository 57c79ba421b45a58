//! Structural checks on a built complex, each reported as a pass/fail record.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{ambient_sign, induced_basis, FacetKind, FacetOrbit, VoronoiComplex};
use crate::cone::meets_boundary;
use crate::forms::ambient_orientation_sign;
use crate::group::{canonical_sign, GroupElement, MatGroup};
use crate::linalg::Sign;
use crate::perfect::{random_unimodular, GroupKind, VoronoiGraph};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub holds: bool,
    /// Number of instances examined.
    pub checked: usize,
    /// First failure, if any.
    pub detail: String,
}

struct Tally {
    name: &'static str,
    checked: usize,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, checked: 0, failure: None }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            name: self.name.to_string(),
            holds: self.failure.is_none(),
            checked: self.checked,
            detail: self.failure.unwrap_or_default(),
        }
    }
}

/// Whether Γ preserves the ambient orientation (`SL_n`, or `GL_n` with `n` odd).
pub fn orientation_preserving(n: usize, kind: GroupKind) -> bool {
    kind == GroupKind::Sl || n % 2 == 1
}

/// The two cells glued along every facet induce opposite orientations on it.
pub fn opposite_orientations(graph: &VoronoiGraph) -> PropertyResult {
    let mut t = Tally::new("opposite_orientations");
    for e in &graph.edges {
        let cell = &graph.nodes[e.from];
        let basis = induced_basis(cell, e.facet);
        let incident = cell.facets()[e.facet].incident;
        let v_here = &cell.minvecs.vectors[cell.domain.all().minus(incident).iter().next().expect("off-facet ray")];
        let face: HashSet<Vec<i64>> = cell.domain.face_vectors(incident).into_iter().collect();
        let v_there = graph.nodes[e.to]
            .minvecs
            .vectors
            .iter()
            .map(|x| e.witness.apply(x))
            .find(|y| !face.contains(&canonical_sign(y)))
            .expect("neighbour has a ray off the facet");
        let here = ambient_sign(&basis, v_here);
        let there = ambient_sign(&basis, &v_there);
        t.check(here * there == Sign::Neg, || format!("facet {} of {}", e.facet, cell.name));
    }
    t.finish()
}

/// No facet of a top cell meets the boundary of the positive definite cone.
pub fn facets_avoid_boundary(graph: &VoronoiGraph) -> PropertyResult {
    let mut t = Tally::new("facets_avoid_boundary");
    for node in &graph.nodes {
        for (k, f) in node.facets().iter().enumerate() {
            t.check(!meets_boundary(&node.domain.face_vectors(f.incident)), || format!("facet {k} of {}", node.name));
        }
    }
    t.finish()
}

fn same_elements(a: &MatGroup, b: &[GroupElement]) -> bool {
    let mut b = b.to_vec();
    b.sort();
    b.dedup();
    a.elements() == b.as_slice()
}

/// For `τ = σ ∩ γρ` non-self-intersecting, `Γ_τ = Γ_σ ∩ Γ_{γρ}`; for every
/// facet orbit, `|Γ_σ·τ|·|Γ_σ ∩ Γ_τ| = |Γ_σ|`.
pub fn stab_groups(c: &VoronoiComplex) -> PropertyResult {
    let mut t = Tally::new("stab_groups");
    for f in &c.facets {
        let sigma = &c.graph.nodes[f.cell];
        let gt = f.stabilizer();
        if f.kind == FacetKind::NonSelfIntersecting {
            let rho = c.graph.nodes[f.other].stabilizer.conjugate(&f.witness);
            let meet: Vec<GroupElement> = sigma.stabilizer.iter().filter(|g| rho.contains(g)).cloned().collect();
            t.check(same_elements(gt, &meet), || format!("Γ_τ ≠ Γ_σ ∩ Γ_γρ for {:?}", f.vectors));
        }
        let orbit = sigma.facet_orbit(f.facet).len();
        let inner = sigma.stabilizer.iter().filter(|g| gt.contains(g)).count();
        t.check(orbit * inner == sigma.stab_order(), || {
            format!("orbit {orbit} × {inner} ≠ {} for {:?}", sigma.stab_order(), f.vectors)
        });
        if f.kind == FacetKind::NonSelfIntersecting {
            t.check(inner == gt.order(), || format!("Γ_τ ⊄ Γ_σ for {:?}", f.vectors));
        }
    }
    t.finish()
}

/// Decomposition `Γ_τ = (Γ_σ ∩ Γ_{γσ}) ⊔ Γ_{(σ,γσ)}`, index in {1, 2}, and,
/// for orientation-preserving Γ, the equivalence of `γ⁻¹τ ∼ τ` under Γ_σ,
/// `τ ∉ Σ`, and index 2, plus the splitting into two Γ_σ-orbits for `τ ∈ Σ`.
pub fn self_intersecting_stab(c: &VoronoiComplex) -> PropertyResult {
    let mut t = Tally::new("self_intersecting_facets_stab");
    let preserving = orientation_preserving(c.n, c.group);
    for f in c.facets.iter().filter(|f| f.kind == FacetKind::SelfIntersecting) {
        let d = SelfIntersection::new(c, f);
        let gt = f.stabilizer();
        let disjoint = d.meet.iter().all(|g| !d.swap.contains(g));
        let mut union = d.meet.clone();
        union.extend(d.swap.iter().cloned());
        t.check(disjoint && same_elements(gt, &union), || format!("decomposition fails for {:?}", f.vectors));
        let index = gt.order() / d.meet.len().max(1);
        t.check(d.meet.iter().all(|g| gt.contains(g)) && (index == 1 || index == 2), || {
            format!("index {index} for {:?}", f.vectors)
        });
        if preserving {
            let (a, b, cc) = (d.back_in_orbit, !f.kept, index == 2);
            t.check(a == b && b == cc, || format!("(a,b,c) = ({a},{b},{cc}) for {:?}", f.vectors));
            if f.kept {
                t.check(d.local_orbits == 2, || format!("{} local orbits for kept {:?}", d.local_orbits, f.vectors));
            }
        }
    }
    t.finish()
}

/// Group-theoretic data of a self-intersecting facet orbit `τ = σ ∩ γσ`.
pub struct SelfIntersection {
    /// `Γ_σ ∩ Γ_{γσ}`.
    pub meet: Vec<GroupElement>,
    /// `Γ_{(σ,γσ)}`: elements exchanging `σ` and `γσ`.
    pub swap: Vec<GroupElement>,
    /// `γ⁻¹τ` lies in the Γ_σ-orbit of `τ`.
    pub back_in_orbit: bool,
    /// Number of Γ_σ-orbits among the facets of `σ` that are Γ-equivalent to `τ`.
    pub local_orbits: usize,
}

impl SelfIntersection {
    pub fn new(c: &VoronoiComplex, f: &FacetOrbit) -> Self {
        let sigma = &c.graph.nodes[f.cell];
        let gamma = &f.witness;
        let other = sigma.stabilizer.conjugate(gamma);
        let meet: Vec<GroupElement> = sigma.stabilizer.iter().filter(|g| other.contains(g)).cloned().collect();
        let swap: Vec<GroupElement> = sigma
            .stabilizer
            .iter()
            .map(|a| gamma.mul(a))
            .filter(|s| sigma.stabilizer.contains(&s.mul(gamma)))
            .collect();
        let back = sigma
            .map_rays(&gamma.inverse(), sigma, sigma.facets()[f.facet].incident)
            .and_then(|r| sigma.facet_index(r))
            .expect("γ⁻¹τ is a facet of σ");
        let orbit = sigma.facet_orbit(f.facet);
        let back_in_orbit = orbit.iter().any(|(k, _)| *k == back);
        let local: HashSet<usize> = f.members.iter().filter(|m| m.cell == f.cell).map(|m| m.facet).collect();
        let mut seen: HashSet<usize> = HashSet::new();
        let mut local_orbits = 0;
        let mut ks: Vec<usize> = local.iter().copied().collect();
        ks.sort_unstable();
        for k in ks {
            if seen.contains(&k) {
                continue;
            }
            local_orbits += 1;
            for (j, _) in sigma.facet_orbit(k) {
                seen.insert(j);
            }
        }
        SelfIntersection { meet, swap, back_in_orbit, local_orbits }
    }
}

/// `X ↦ γXγᵀ` has determinant sign `det(γ)^{n+1}` on random unimodular γ.
pub fn deter_action(n: usize, samples: usize, seed: u64) -> PropertyResult {
    let mut t = Tally::new("deter_action");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let g = random_unimodular(n, &mut rng);
        let expected = if g.det() == -1 && n.is_multiple_of(2) { Sign::Neg } else { Sign::Pos };
        t.check(ambient_orientation_sign(&g) == expected, || format!("γ = {g}"));
    }
    t.finish()
}

/// With more than one class, every cell has a facet glued to a different class.
pub fn atleast_one_nbh(graph: &VoronoiGraph) -> PropertyResult {
    let mut t = Tally::new("atleast_one_nbh");
    if graph.nodes.len() > 1 {
        for (i, node) in graph.nodes.iter().enumerate() {
            t.check(graph.edges.iter().any(|e| e.from == i && e.to != i), || node.name.clone());
        }
    }
    t.finish()
}

/// For orientation-preserving Γ every non-self-intersecting facet orbit is kept.
pub fn non_self_facets_kept(c: &VoronoiComplex) -> PropertyResult {
    let mut t = Tally::new("non_self_facets_kept");
    if orientation_preserving(c.n, c.group) {
        for f in c.facets.iter().filter(|f| f.kind == FacetKind::NonSelfIntersecting) {
            t.check(f.kept, || format!("{:?}", f.vectors));
        }
        for cell in &c.cells {
            t.check(cell.kept, || cell.name.clone());
        }
    }
    t.finish()
}

pub fn check_all(c: &VoronoiComplex, seed: u64) -> Vec<PropertyResult> {
    vec![
        opposite_orientations(&c.graph),
        facets_avoid_boundary(&c.graph),
        stab_groups(c),
        self_intersecting_stab(c),
        deter_action(c.n, 100, seed),
        atleast_one_nbh(&c.graph),
        non_self_facets_kept(c),
    ]
}
