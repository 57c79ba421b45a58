//! Top homology over Q: the kernel of the top differential, the canonical
//! chain `Σ σ/|Γ_σ|`, and theorem verdicts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::{Differential, FacetKind, VoronoiComplex};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, RatMat};
use crate::perfect::GroupKind;
use crate::properties::{check_all, orientation_preserving, PropertyResult};

/// A chain on the kept top cells, in differential column order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chain {
    pub cells: Vec<String>,
    #[serde(with = "crate::serde_util::rational_vec")]
    pub coefficients: Vec<BigRational>,
}

/// `λ_σ = 1/|Γ_σ|` on every kept top cell.
pub fn canonical_cycle(c: &VoronoiComplex) -> Chain {
    let cells = c.col_cells.iter().map(|&i| c.cells[i].name.clone()).collect();
    let coefficients =
        c.col_cells.iter().map(|&i| BigRational::new(BigInt::one(), BigInt::from(c.cells[i].stab_order))).collect();
    Chain { cells, coefficients }
}

/// `d(λ)` as a vector indexed by differential rows.
pub fn apply_differential(d: &Differential, lambda: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); d.rows];
    for &(r, c, v) in &d.entries {
        out[r] += &lambda[c] * BigRational::from_integer(BigInt::from(v));
    }
    out
}

/// Basis of `ker d` over Q, each vector primitive integral.
pub fn kernel(d: &Differential) -> Vec<Vec<BigRational>> {
    if d.rows == 0 {
        return (0..d.cols)
            .map(|i| (0..d.cols).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
            .collect();
    }
    let dense = d.to_dense();
    kernel_basis(&RatMat::from_i64_rows(&dense)).into_iter().map(|v| v.0).collect()
}

/// One row of `d(λ)` spelled out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowCertificate {
    pub row: usize,
    pub kind: FacetKind,
    pub facet_stab_order: usize,
    /// `(column, [σ:τ], |Γ_σ|)` for the nonzero entries.
    pub terms: Vec<(usize, i64, usize)>,
    #[serde(with = "crate::serde_util::rational")]
    pub value: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub n: usize,
    pub group: GroupKind,
    /// Which statement was checked: `top_cycle` or `gl_even_vanishing`.
    pub statement: String,
    pub cells: Vec<String>,
    pub stab_orders: Vec<usize>,
    pub facet_orbits: usize,
    pub kernel_dim: usize,
    #[serde(with = "crate::serde_util::rational_vecs")]
    pub kernel_basis: Vec<Vec<BigRational>>,
    pub canonical: Chain,
    pub canonical_in_kernel: bool,
    pub kernel_spanned_by_canonical: bool,
    pub row_certificates: Vec<RowCertificate>,
    pub properties: Vec<PropertyResult>,
    /// The statement's prediction holds.
    pub verified: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Run the structural property checks and fold them into the verdict.
    pub properties: bool,
    pub seed: u64,
}

/// Chains `λ` in the kernel with every ratio `λ_σ/λ_ρ = |Γ_ρ|/|Γ_σ|` across
/// non-self-intersecting rows, and no zero coefficient unless `λ = 0`.
pub fn uniqueness_holds(c: &VoronoiComplex, lambda: &[BigRational]) -> bool {
    let all_zero = lambda.iter().all(Zero::is_zero);
    if all_zero {
        return true;
    }
    if lambda.iter().any(Zero::is_zero) {
        return false;
    }
    c.differential.entries.iter().all(|&(r, col, _)| {
        c.differential.row(r).iter().all(|&(col2, _)| {
            let (s, t) = (c.col_cells[col], c.col_cells[col2]);
            &lambda[col] * BigInt::from(c.cells[s].stab_order) == &lambda[col2] * BigInt::from(c.cells[t].stab_order)
        })
    })
}

fn report(c: &VoronoiComplex, statement: &str, opts: VerifyOptions) -> TheoremReport {
    let canonical = canonical_cycle(c);
    let image = apply_differential(&c.differential, &canonical.coefficients);
    let canonical_in_kernel = image.iter().all(Zero::is_zero);
    let basis = kernel(&c.differential);
    let nonzero = canonical.coefficients.iter().any(|x| !x.is_zero());
    let kernel_spanned_by_canonical = basis.len() == 1 && canonical_in_kernel && nonzero;
    let row_certificates = (0..c.differential.rows)
        .map(|r| {
            let t = &c.facets[c.row_orbits[r]];
            RowCertificate {
                row: r,
                kind: t.kind,
                facet_stab_order: t.stab_order,
                terms: c
                    .differential
                    .row(r)
                    .into_iter()
                    .map(|(col, v)| (col, v, c.cells[c.col_cells[col]].stab_order))
                    .collect(),
                value: image[r].clone(),
            }
        })
        .collect();
    let properties = if opts.properties { check_all(c, opts.seed) } else { Vec::new() };
    TheoremReport {
        n: c.n,
        group: c.group,
        statement: statement.to_string(),
        cells: canonical.cells.clone(),
        stab_orders: c.col_cells.iter().map(|&i| c.cells[i].stab_order).collect(),
        facet_orbits: c.differential.rows,
        kernel_dim: basis.len(),
        kernel_basis: basis,
        canonical,
        canonical_in_kernel,
        kernel_spanned_by_canonical,
        row_certificates,
        properties,
        verified: false,
    }
}

/// The canonical chain generates `ker d` for orientation-preserving Γ.
pub fn verify_top_cycle(c: &VoronoiComplex, opts: VerifyOptions) -> Result<TheoremReport> {
    if !orientation_preserving(c.n, c.group) {
        return Err(Error::WrongGroupParity(c.n));
    }
    let mut r = report(c, "top_cycle", opts);
    let rows_ok = row_structure_holds(c);
    let unique = r.kernel_basis.iter().all(|v| uniqueness_holds(c, v));
    r.verified =
        r.kernel_dim == 1 && r.kernel_spanned_by_canonical && rows_ok && unique && r.properties.iter().all(|p| p.holds);
    Ok(r)
}

/// Self-intersecting rows vanish; the others have two entries of opposite sign
/// with `|[σ:τ]| = |Γ_σ|/|Γ_τ|`.
pub fn row_structure_holds(c: &VoronoiComplex) -> bool {
    (0..c.differential.rows).all(|r| {
        let t = &c.facets[c.row_orbits[r]];
        let row = c.differential.row(r);
        match t.kind {
            FacetKind::SelfIntersecting => row.is_empty(),
            FacetKind::NonSelfIntersecting => {
                row.len() == 2
                    && row[0].1.signum() == -row[1].1.signum()
                    && row.iter().all(|&(col, v)| {
                        let s = c.cells[c.col_cells[col]].stab_order;
                        s.is_multiple_of(t.stab_order) && v.unsigned_abs() as usize == s / t.stab_order
                    })
            }
        }
    })
}

/// For `GL_n(Z)`, `n` even: the kernel is zero, and a top cell survives the
/// orientation filter exactly when its stabilizer lies in `SL_n(Z)`.
pub fn verify_gl_even_vanishing(c: &VoronoiComplex, opts: VerifyOptions) -> Result<TheoremReport> {
    if c.group != GroupKind::Gl || c.n % 2 == 1 {
        return Err(Error::NotVanishingCase(format!("{} with n = {}", c.group, c.n)));
    }
    let mut r = report(c, "gl_even_vanishing", opts);
    let mechanism = c.cells.iter().all(|cell| {
        let in_sl = c.graph.nodes[cell.node].stabilizer.iter().all(|g| g.det() == 1);
        cell.kept == in_sl
    });
    let roots_excluded =
        c.cells.iter().filter(|cell| cell.name.starts_with('A') || cell.name.starts_with('D')).all(|cell| !cell.kept);
    r.verified = r.kernel_dim == 0 && mechanism && roots_excluded && r.properties.iter().all(|p| p.holds);
    Ok(r)
}

/// Dispatch on group and parity.
pub fn verify(c: &VoronoiComplex, opts: VerifyOptions) -> Result<TheoremReport> {
    if orientation_preserving(c.n, c.group) {
        verify_top_cycle(c, opts)
    } else {
        verify_gl_even_vanishing(c, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, ComplexOptions};
    use crate::perfect::enumerate_perfect_forms;

    fn complex(n: usize, kind: GroupKind) -> VoronoiComplex {
        build_complex(&enumerate_perfect_forms(n, kind).unwrap(), ComplexOptions::default()).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn rank_one_is_trivial() {
        let c = complex(1, GroupKind::Gl);
        assert_eq!(c.cells.len(), 1);
        assert!(c.facets.is_empty());
        let r = verify(&c, VerifyOptions::default()).unwrap();
        assert!(r.verified);
        assert_eq!(r.kernel_dim, 1);
        assert_eq!(r.canonical.coefficients, vec![q(1, 2)]);
    }

    #[test]
    fn a2_sl_cycle() {
        let c = complex(2, GroupKind::Sl);
        let r = verify_top_cycle(&c, VerifyOptions { properties: true, seed: 3 }).unwrap();
        assert!(r.verified);
        assert_eq!(r.cells, vec!["A2".to_string()]);
        assert_eq!(r.canonical.coefficients, vec![q(1, 6)]);
        assert_eq!(r.facet_orbits, 0);
    }

    #[test]
    fn gl_even_dispatch() {
        let c = complex(2, GroupKind::Gl);
        assert!(matches!(verify_top_cycle(&c, VerifyOptions::default()), Err(Error::WrongGroupParity(2))));
        let r = verify(&c, VerifyOptions::default()).unwrap();
        assert_eq!(r.statement, "gl_even_vanishing");
        assert_eq!(r.kernel_dim, 0);
        assert!(r.verified);
        let odd = complex(3, GroupKind::Gl);
        assert!(matches!(verify_gl_even_vanishing(&odd, VerifyOptions::default()), Err(Error::NotVanishingCase(_))));
    }

    #[test]
    fn kernel_of_two_column_row() {
        let d = Differential::from_dense(&[vec![10, -48]], 2);
        let k = kernel(&d);
        assert_eq!(k.len(), 1);
        // 10·x = 48·y, so the kernel is spanned by (24, 5).
        assert_eq!(&k[0][0] * q(5, 1), &k[0][1] * q(24, 1));
        let image = apply_differential(&d, &[q(1, 120), q(1, 576)]);
        assert_eq!(image, vec![q(0, 1)]);
    }

    #[test]
    fn empty_differential_kernel_is_everything() {
        let d = Differential::from_dense(&[], 3);
        assert_eq!(kernel(&d).len(), 3);
    }
}
