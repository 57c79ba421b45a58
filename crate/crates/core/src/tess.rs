//! Γ-tessellations of an open cone by top-dimensional tiles with finite
//! stabilizers, given combinatorially by orbit data.
//!
//! Faces lying in the boundary of the cone are not part of an instance. The
//! uniqueness half of the weighted-cycle statement is asserted only on
//! connected tile graphs; otherwise the kernel is reported per component.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::{FacetKind, VoronoiComplex};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, RatMat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub name: String,
    pub stab_order: u64,
    /// No stabilizer element reverses the tile's orientation.
    pub kept: bool,
}

/// A tile orbit meeting a facet orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Incidence {
    pub tile: usize,
    /// Number of facets of the tile representative lying in the facet orbit.
    pub count: u64,
    /// `[σ:τ]`; ignored for facet orbits that are not kept.
    pub signed: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TessFacet {
    pub stab_order: u64,
    pub kind: FacetKind,
    pub kept: bool,
    pub incidences: Vec<Incidence>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TessInstance {
    pub ambient_dim: usize,
    pub tiles: Vec<Tile>,
    pub facet_orbits: Vec<TessFacet>,
    /// Pairs of tile orbits glued along some facet.
    pub adjacency: Vec<(usize, usize)>,
}

/// Finitely supported weights on tile orbits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightVector {
    #[serde(with = "weights_serde")]
    pub weights: BTreeMap<usize, BigRational>,
}

mod weights_serde {
    use std::collections::BTreeMap;

    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<usize, BigRational>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(|(k, v)| (*k, v.to_string())).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, BigRational>, D::Error> {
        Vec::<(usize, String)>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| v.parse().map(|q| (k, q)).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl WeightVector {
    pub fn canonical(inst: &TessInstance) -> Self {
        let weights = inst
            .tiles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.kept)
            .map(|(i, t)| (i, BigRational::new(BigInt::one(), BigInt::from(t.stab_order))))
            .collect();
        WeightVector { weights }
    }

    pub fn constant(inst: &TessInstance, value: BigRational) -> Self {
        let weights = inst.tiles.iter().enumerate().filter(|(_, t)| t.kept).map(|(i, _)| (i, value.clone())).collect();
        WeightVector { weights }
    }
}

impl TessInstance {
    /// Check the combinatorial hypotheses.
    ///
    /// Each concrete facet lies in exactly two tiles: summing
    /// `count · |Γ_τ| / |Γ_σ|` over the tiles meeting a facet orbit gives 2.
    pub fn validate(&self) -> Result<()> {
        let violation = |s: String| Err(Error::InvariantViolation(s));
        if self.ambient_dim == 0 {
            return violation("ambient dimension is zero".into());
        }
        if self.tiles.is_empty() {
            return violation("no tiles".into());
        }
        if let Some(t) = self.tiles.iter().find(|t| t.stab_order == 0) {
            return violation(format!("tile {} has an empty stabilizer", t.name));
        }
        for &(a, b) in &self.adjacency {
            if a >= self.tiles.len() || b >= self.tiles.len() {
                return Err(Error::IndexOutOfRange(format!("adjacency ({a}, {b})")));
            }
        }
        for (k, f) in self.facet_orbits.iter().enumerate() {
            if f.stab_order == 0 {
                return violation(format!("facet orbit {k} has an empty stabilizer"));
            }
            let mut tiles: Vec<usize> = Vec::new();
            let mut mass = BigRational::zero();
            for inc in &f.incidences {
                let Some(tile) = self.tiles.get(inc.tile) else {
                    return Err(Error::IndexOutOfRange(format!("facet orbit {k} names tile {}", inc.tile)));
                };
                if f.kept && inc.signed.unsigned_abs() > inc.count {
                    return violation(format!("facet orbit {k}: |[σ:τ]| exceeds the facet count"));
                }
                if !tiles.contains(&inc.tile) {
                    tiles.push(inc.tile);
                }
                mass += BigRational::new(
                    BigInt::from(inc.count) * BigInt::from(f.stab_order),
                    BigInt::from(tile.stab_order),
                );
            }
            if mass != BigRational::from_integer(BigInt::from(2)) {
                return violation(format!("facet orbit {k} lies in {mass} tiles, not 2"));
            }
            let expected = match f.kind {
                FacetKind::SelfIntersecting => 1,
                FacetKind::NonSelfIntersecting => 2,
            };
            if tiles.len() != expected {
                return violation(format!(
                    "facet orbit {k} meets {} tile orbits, {:?} needs {expected}",
                    tiles.len(),
                    f.kind
                ));
            }
        }
        Ok(())
    }

    /// Kept facet orbits (rows) by kept tiles (columns).
    pub fn matrix(&self) -> (Vec<usize>, Vec<usize>, Vec<Vec<i64>>) {
        let cols: Vec<usize> = (0..self.tiles.len()).filter(|&i| self.tiles[i].kept).collect();
        let rows: Vec<usize> = (0..self.facet_orbits.len()).filter(|&k| self.facet_orbits[k].kept).collect();
        let dense = rows
            .iter()
            .map(|&k| {
                let mut row = vec![0i64; cols.len()];
                for inc in &self.facet_orbits[k].incidences {
                    if let Ok(j) = cols.binary_search(&inc.tile) {
                        row[j] += inc.signed;
                    }
                }
                row
            })
            .collect();
        (rows, cols, dense)
    }

    /// Connected components of the tile-orbit graph.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.tiles.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &(a, b) in &self.adjacency {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }
}

/// `Σ λ_σ Σ [σ:τ] τ`, keyed by kept facet orbit.
pub fn weighted_boundary(inst: &TessInstance, w: &WeightVector) -> Result<BTreeMap<usize, BigRational>> {
    for &t in w.weights.keys() {
        match inst.tiles.get(t) {
            None => return Err(Error::IndexOutOfRange(format!("weight on tile {t}"))),
            Some(tile) if !tile.kept => {
                return Err(Error::IndexOutOfRange(format!("weight on tile {t}, which is not orientation-kept")))
            }
            Some(_) => {}
        }
    }
    let mut out = BTreeMap::new();
    for (k, f) in inst.facet_orbits.iter().enumerate().filter(|(_, f)| f.kept) {
        let mut acc = BigRational::zero();
        for inc in &f.incidences {
            if let Some(l) = w.weights.get(&inc.tile) {
                acc += l * BigRational::from_integer(BigInt::from(inc.signed));
            }
        }
        out.insert(k, acc);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TessVerdict {
    pub kept_tiles: Vec<usize>,
    pub kept_facets: Vec<usize>,
    pub canonical_annihilated: bool,
    pub kernel_dim: usize,
    /// Primitive integral kernel basis over the kept tiles.
    #[serde(with = "crate::serde_util::rational_vecs")]
    pub kernel_basis: Vec<Vec<BigRational>>,
    pub connected: bool,
    /// Components of the tile graph that contain a kept tile.
    pub components: Vec<Vec<usize>>,
    /// Connected: the kernel is the line of the canonical weights. Otherwise:
    /// one kernel dimension per component, each carrying the canonical weights.
    pub holds: bool,
}

pub fn check_general_theorem(inst: &TessInstance) -> Result<TessVerdict> {
    inst.validate()?;
    let (rows, cols, dense) = inst.matrix();
    let canonical = WeightVector::canonical(inst);
    let canonical_annihilated = weighted_boundary(inst, &canonical)?.values().all(Zero::is_zero);
    let kernel_basis: Vec<Vec<BigRational>> = if rows.is_empty() {
        (0..cols.len())
            .map(|i| (0..cols.len()).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
            .collect()
    } else {
        kernel_basis(&RatMat::from_i64_rows(&dense)).into_iter().map(|v| v.0).collect()
    };
    let components: Vec<Vec<usize>> =
        inst.components().into_iter().filter(|c| c.iter().any(|&t| inst.tiles[t].kept)).collect();
    let connected = inst.components().len() == 1;
    let canon_vec: Vec<BigRational> = cols.iter().map(|t| canonical.weights[t].clone()).collect();
    let holds = canonical_annihilated
        && if connected {
            kernel_basis.len() == cols.len().min(1) && kernel_basis.iter().all(|v| proportional(v, &canon_vec))
        } else {
            kernel_basis.len() == components.len()
                && components.iter().all(|comp| {
                    let restricted: Vec<BigRational> = cols
                        .iter()
                        .map(|t| if comp.contains(t) { canonical.weights[t].clone() } else { BigRational::zero() })
                        .collect();
                    dense.iter().all(|row| {
                        row.iter().zip(&restricted).map(|(a, b)| b * BigInt::from(*a)).sum::<BigRational>().is_zero()
                    })
                })
        };
    Ok(TessVerdict {
        kept_tiles: cols,
        kept_facets: rows,
        canonical_annihilated,
        kernel_dim: kernel_basis.len(),
        kernel_basis,
        connected,
        components,
        holds,
    })
}

fn proportional(a: &[BigRational], b: &[BigRational]) -> bool {
    let Some(i) = b.iter().position(|x| !x.is_zero()) else {
        return a.iter().all(Zero::is_zero);
    };
    let ratio = &a[i] / &b[i];
    !ratio.is_zero() && a.iter().zip(b).all(|(x, y)| *x == y * &ratio)
}

/// The open quadrant cut into `k` sectors by `k + 1` rays, Γ trivial. The two
/// boundary rays are not facets.
pub fn sector_fan(k: usize) -> Result<TessInstance> {
    if k < 2 {
        return Err(Error::InvariantViolation(format!("a sector fan needs at least 2 sectors, got {k}")));
    }
    let tiles = (0..k).map(|i| Tile { name: format!("S{i}"), stab_order: 1, kept: true }).collect();
    let facet_orbits = (0..k - 1)
        .map(|i| TessFacet {
            stab_order: 1,
            kind: FacetKind::NonSelfIntersecting,
            kept: true,
            incidences: vec![
                Incidence { tile: i, count: 1, signed: 1 },
                Incidence { tile: i + 1, count: 1, signed: -1 },
            ],
        })
        .collect();
    let adjacency = (0..k - 1).map(|i| (i, i + 1)).collect();
    Ok(TessInstance { ambient_dim: 2, tiles, facet_orbits, adjacency })
}

/// Translate the top two degrees of a Voronoi complex.
pub fn from_voronoi(c: &VoronoiComplex) -> TessInstance {
    let tiles = c
        .cells
        .iter()
        .map(|cell| Tile { name: cell.name.clone(), stab_order: cell.stab_order as u64, kept: cell.kept })
        .collect();
    let facet_orbits = c
        .facets
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
            for m in &f.members {
                *counts.entry(m.cell).or_default() += 1;
            }
            let signed = c.incidence[k].as_ref();
            TessFacet {
                stab_order: f.stab_order as u64,
                kind: f.kind,
                kept: f.kept,
                incidences: counts
                    .into_iter()
                    .map(|(tile, count)| Incidence { tile, count, signed: signed.map_or(0, |s| s[tile]) })
                    .collect(),
            }
        })
        .collect();
    let mut adjacency: Vec<(usize, usize)> =
        c.graph.edges.iter().map(|e| (e.from.min(e.to), e.from.max(e.to))).collect();
    adjacency.sort_unstable();
    adjacency.dedup();
    TessInstance { ambient_dim: crate::forms::sym_dim(c.n), tiles, facet_orbits, adjacency }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, ComplexOptions};
    use crate::homology::{verify, VerifyOptions};
    use crate::perfect::{enumerate_perfect_forms, GroupKind};

    fn q(a: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(a))
    }

    #[test]
    fn sector_fans() {
        for k in [2, 3, 5, 8] {
            let inst = sector_fan(k).unwrap();
            let v = check_general_theorem(&inst).unwrap();
            assert!(v.holds, "k = {k}");
            assert_eq!(v.kernel_dim, 1);
            assert!(v.kernel_basis[0].iter().all(|x| *x == q(1)));
            let ones = weighted_boundary(&inst, &WeightVector::constant(&inst, q(1))).unwrap();
            assert!(ones.values().all(Zero::is_zero));
        }
        assert!(sector_fan(1).is_err());
    }

    #[test]
    fn corrupted_fan() {
        let mut inst = sector_fan(2).unwrap();
        inst.facet_orbits[0].incidences[1].signed = 1;
        let v = check_general_theorem(&inst).unwrap();
        assert!(!v.holds);
        assert!(!v.canonical_annihilated);
        assert_eq!(v.kernel_dim, 1);
        assert!(proportional(&v.kernel_basis[0], &[q(1), q(-1)]));
    }

    #[test]
    fn zero_weights_and_bad_index() {
        let inst = sector_fan(3).unwrap();
        let zero = weighted_boundary(&inst, &WeightVector::default()).unwrap();
        assert_eq!(zero.len(), 2);
        assert!(zero.values().all(Zero::is_zero));
        let mut w = WeightVector::default();
        w.weights.insert(7, q(1));
        assert!(matches!(weighted_boundary(&inst, &w), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn two_tiles_per_facet_enforced() {
        let mut inst = sector_fan(3).unwrap();
        inst.facet_orbits[1].incidences.pop();
        assert!(matches!(check_general_theorem(&inst), Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn disconnected_reports_components() {
        let mut inst = sector_fan(2).unwrap();
        let other = sector_fan(2).unwrap();
        inst.tiles.extend(other.tiles);
        let mut f = other.facet_orbits[0].clone();
        for inc in &mut f.incidences {
            inc.tile += 2;
        }
        inst.facet_orbits.push(f);
        inst.adjacency.push((2, 3));
        let v = check_general_theorem(&inst).unwrap();
        assert!(!v.connected);
        assert_eq!(v.components, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(v.kernel_dim, 2);
        assert!(v.holds);
    }

    #[test]
    fn adapter_agrees_with_direct_verification() {
        for (n, kind) in [(2, GroupKind::Sl), (2, GroupKind::Gl), (3, GroupKind::Sl), (4, GroupKind::Gl)] {
            let c = build_complex(&enumerate_perfect_forms(n, kind).unwrap(), ComplexOptions::default()).unwrap();
            let direct = verify(&c, VerifyOptions::default()).unwrap();
            let inst = from_voronoi(&c);
            let v = check_general_theorem(&inst).unwrap();
            assert_eq!(v.kernel_dim, direct.kernel_dim, "n = {n} {kind}");
            assert_eq!(v.holds, direct.verified, "n = {n} {kind}");
            assert!(v.connected);
        }
    }
}
