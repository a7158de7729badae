//! Almost-representation certification: partial group tables, matrix
//! assignments, defect/separation reports, basis alignment, and the
//! finite-dimensional algebra-patch certifier.
//!
//! Defect is the maximum of `rho(phi(g)phi(h) - phi(gh))` over defined
//! triples; separation is the minimum of `rho(I - phi(g))` over `g != e`.
//! The headline verdict is the quarter threshold: a report is certified at
//! `eps = max_defect` when `min_separation > 1/4 - eps`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{rational_from_ints, Field, Rational, Value};
use crate::matrix::Matrix;

/// A finite group fragment: labels with a partial product, a partial
/// inverse, and a distinguished identity label `"e"`.
///
/// Loading validates identity laws, inverse consistency, and associativity
/// on every triple whose products are all defined; a broken table would
/// silently corrupt every downstream certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialGroupTable {
    elements: Vec<String>,
    product: BTreeMap<(String, String), String>,
    inverse: BTreeMap<String, String>,
}

pub const IDENTITY_LABEL: &str = "e";

impl PartialGroupTable {
    pub fn new(
        elements: Vec<String>,
        product: BTreeMap<(String, String), String>,
        inverse: BTreeMap<String, String>,
    ) -> Result<PartialGroupTable> {
        let set: BTreeSet<&String> = elements.iter().collect();
        if set.len() != elements.len() {
            return Err(Error::BadTable("duplicate element labels".into()));
        }
        if !set.contains(&IDENTITY_LABEL.to_string()) {
            return Err(Error::BadTable("missing identity label \"e\"".into()));
        }
        if elements.iter().any(|l| l.contains(',') || l.is_empty()) {
            return Err(Error::BadTable(
                "labels must be nonempty and comma-free".into(),
            ));
        }
        let known = |l: &String| set.contains(l);
        for ((g, h), gh) in &product {
            if !known(g) || !known(h) || !known(gh) {
                return Err(Error::BadTable(format!(
                    "product {g},{h} -> {gh} uses unknown labels"
                )));
            }
        }
        for (g, gi) in &inverse {
            if !known(g) || !known(gi) {
                return Err(Error::BadTable(format!(
                    "inverse {g} -> {gi} uses unknown labels"
                )));
            }
        }
        let table = PartialGroupTable {
            elements,
            product,
            inverse,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        let e = IDENTITY_LABEL;
        for g in &self.elements {
            if let Some(r) = self.product(e, g) {
                if r != g {
                    return Err(Error::BadTable(format!("e*{g} = {r}, expected {g}")));
                }
            }
            if let Some(r) = self.product(g, e) {
                if r != g {
                    return Err(Error::BadTable(format!("{g}*e = {r}, expected {g}")));
                }
            }
        }
        for (g, gi) in &self.inverse {
            for (a, b) in [(g, gi), (gi, g)] {
                if let Some(r) = self.product(a, b) {
                    if r != e {
                        return Err(Error::BadTable(format!("{a}*{b} = {r}, expected e")));
                    }
                }
            }
        }
        // associativity on fully defined triples
        for g in &self.elements {
            for h in &self.elements {
                let Some(gh) = self.product(g, h) else {
                    continue;
                };
                for k in &self.elements {
                    let (Some(hk), Some(gh_k)) = (self.product(h, k), self.product(gh, k)) else {
                        continue;
                    };
                    if let Some(g_hk) = self.product(g, hk) {
                        if g_hk != gh_k {
                            return Err(Error::BadTable(format!(
                                "associativity fails: ({g}*{h})*{k} = {gh_k} but {g}*({h}*{k}) = {g_hk}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn identity(&self) -> &str {
        IDENTITY_LABEL
    }

    pub fn product(&self, g: &str, h: &str) -> Option<&String> {
        self.product.get(&(g.to_string(), h.to_string()))
    }

    pub fn inverse(&self, g: &str) -> Option<&String> {
        self.inverse.get(g)
    }

    pub fn products(&self) -> impl Iterator<Item = (&(String, String), &String)> {
        self.product.iter()
    }

    pub fn inverses(&self) -> &BTreeMap<String, String> {
        &self.inverse
    }

    /// Checks that the table is a total finite group: every product and
    /// inverse defined (associativity already holds by construction).
    pub fn require_total_group(&self) -> Result<()> {
        for g in &self.elements {
            if !self.inverse.contains_key(g) {
                return Err(Error::BadTable(format!("missing inverse of {g}")));
            }
            for h in &self.elements {
                if self.product(g, h).is_none() {
                    return Err(Error::BadTable(format!("missing product {g}*{h}")));
                }
            }
        }
        Ok(())
    }
}

/// An assignment of invertible matrices to a group fragment, with the
/// identity label bound to the identity matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlmostRep {
    table: PartialGroupTable,
    field: Field,
    dim: usize,
    matrices: BTreeMap<String, Matrix>,
}

impl AlmostRep {
    pub fn new(
        table: PartialGroupTable,
        field: Field,
        dim: usize,
        matrices: BTreeMap<String, Matrix>,
    ) -> Result<AlmostRep> {
        for g in table.elements() {
            let m = matrices
                .get(g)
                .ok_or_else(|| Error::BadRep(format!("no matrix bound to {g:?}")))?;
            if m.field() != &field {
                return Err(Error::FieldMismatch);
            }
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::SizeMismatch {
                    left: format!("{dim}x{dim}"),
                    right: format!("{}x{}", m.rows(), m.cols()),
                });
            }
            if !m.is_invertible() {
                return Err(Error::BadRep(format!("matrix bound to {g:?} is singular")));
            }
        }
        if matrices.len() != table.elements().len() {
            return Err(Error::BadRep("matrices bound to unknown labels".into()));
        }
        if !matrices[IDENTITY_LABEL].is_identity() {
            return Err(Error::BadRep("identity label must map to I".into()));
        }
        Ok(AlmostRep {
            table,
            field,
            dim,
            matrices,
        })
    }

    pub fn table(&self) -> &PartialGroupTable {
        &self.table
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrices(&self) -> &BTreeMap<String, Matrix> {
        &self.matrices
    }

    pub fn matrix(&self, g: &str) -> &Matrix {
        &self.matrices[g]
    }

    /// Simultaneous conjugation by an invertible matrix; both metrics in the
    /// defect report are invariant under this.
    pub fn conjugate(&self, c: &Matrix) -> Result<AlmostRep> {
        let c_inv = c.inverse()?;
        let mut matrices = BTreeMap::new();
        for (g, m) in &self.matrices {
            matrices.insert(g.clone(), c_inv.mul(m)?.mul(c)?);
        }
        AlmostRep::new(self.table.clone(), self.field.clone(), self.dim, matrices)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairDefect {
    pub left: String,
    pub right: String,
    pub product: String,
    #[serde(with = "crate::json::rat")]
    pub defect: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementSeparation {
    pub label: String,
    #[serde(with = "crate::json::rat")]
    pub separation: Rational,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    #[serde(with = "crate::json::rat")]
    pub max_defect: Rational,
    #[serde(with = "crate::json::rat")]
    pub min_separation: Rational,
    pub per_pair: Vec<PairDefect>,
    pub per_element: Vec<ElementSeparation>,
    /// `min_separation > 1/4 - max_defect`.
    pub quarter_certified: bool,
    /// No non-identity elements: separation 1 by convention.
    pub vacuous_separation: bool,
    /// Some non-identity label is mapped to the identity matrix.
    pub degenerate: bool,
}

/// Exact defect and separation of an almost-representation.
pub fn defect_report(rep: &AlmostRep) -> Result<DefectReport> {
    let mut per_pair = Vec::new();
    let mut max_defect = Rational::zero();
    for ((g, h), gh) in rep.table.products() {
        let defect = rep
            .matrix(g)
            .mul(rep.matrix(h))?
            .rank_distance(rep.matrix(gh))?;
        if defect > max_defect {
            max_defect = defect.clone();
        }
        per_pair.push(PairDefect {
            left: g.clone(),
            right: h.clone(),
            product: gh.clone(),
            defect,
        });
    }

    let identity = Matrix::identity(rep.field.clone(), rep.dim);
    let mut per_element = Vec::new();
    let mut min_separation: Option<Rational> = None;
    let mut degenerate = false;
    for g in rep.table.elements() {
        if g == rep.table.identity() {
            continue;
        }
        let separation = identity.rank_distance(rep.matrix(g))?;
        let is_identity = separation.is_zero();
        degenerate |= is_identity;
        if min_separation
            .as_ref()
            .map(|m| separation < *m)
            .unwrap_or(true)
        {
            min_separation = Some(separation.clone());
        }
        per_element.push(ElementSeparation {
            label: g.clone(),
            separation,
            degenerate: is_identity,
        });
    }
    let vacuous_separation = min_separation.is_none();
    let min_separation = min_separation.unwrap_or_else(Rational::one);
    let quarter_certified = min_separation > rational_from_ints(1, 4) - &max_defect;
    Ok(DefectReport {
        max_defect,
        min_separation,
        per_pair,
        per_element,
        quarter_certified,
        vacuous_separation,
        degenerate,
    })
}

#[derive(Debug, Clone)]
pub struct AlignedRep {
    pub rep: AlmostRep,
    /// Number of leading basis columns on which `phi(g)phi(h)` and
    /// `phi(gh)` now agree exactly, for every defined triple.
    pub agreement_columns: usize,
}

/// Conjugates the representation into a basis whose leading vectors span
/// `V = intersection of ker(phi(g)phi(h) - phi(gh))` over defined triples.
/// Requires `max_defect < eps / |E1|`, which forces `dim V > (1 - eps) n`.
pub fn align_basis(rep: &AlmostRep, eps: &Rational) -> Result<AlignedRep> {
    let n = rep.dim();
    let f = rep.field().clone();
    let triples: Vec<_> = rep.table.products().collect();

    if triples.is_empty() {
        return Ok(AlignedRep {
            rep: rep.clone(),
            agreement_columns: n,
        });
    }

    let report = defect_report(rep)?;
    let threshold = eps / Rational::from_integer(BigInt::from(triples.len()));
    if report.max_defect >= threshold {
        return Err(Error::BadRep(format!(
            "defect {} is not below eps/|E1| = {}; kernel intersection may be too small",
            report.max_defect, threshold
        )));
    }

    let mut differences = Vec::new();
    for ((g, h), gh) in &triples {
        differences.push(rep.matrix(g).mul(rep.matrix(h))?.sub(rep.matrix(gh))?);
    }
    let stacked = Matrix::vstack(&differences)?;
    let kernel = stacked.kernel_basis();
    let dim_v = kernel.len();
    debug_assert!(
        Rational::new(BigInt::from(dim_v), BigInt::from(n.max(1))) > Rational::one() - eps.clone()
    );

    // complete the kernel basis to a full basis with standard vectors
    let mut columns = kernel;
    for i in 0..n {
        if columns.len() == n {
            break;
        }
        let mut e = vec![f.zero(); n];
        e[i] = f.one();
        let mut test = columns.clone();
        test.push(e.clone());
        if Matrix::from_columns(f.clone(), n, &test).rank() == columns.len() + 1 {
            columns.push(e);
        }
    }
    let c = Matrix::from_columns(f.clone(), n, &columns);
    let conjugated = rep.conjugate(&c)?;
    Ok(AlignedRep {
        rep: conjugated,
        agreement_columns: dim_v,
    })
}

/// A finite-dimensional slice of an algebra: basis labels for a subspace `L`
/// containing `1`, plus the structure table of those products `xi*xj` that
/// land back in `L`, as sparse coefficient maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraPatch {
    field: Field,
    basis: Vec<String>,
    products: BTreeMap<(String, String), BTreeMap<String, Value>>,
}

pub const UNIT_LABEL: &str = "1";

impl AlgebraPatch {
    pub fn new(
        field: Field,
        basis: Vec<String>,
        mut products: BTreeMap<(String, String), BTreeMap<String, Value>>,
    ) -> Result<AlgebraPatch> {
        let set: BTreeSet<&String> = basis.iter().collect();
        if set.len() != basis.len() {
            return Err(Error::BadPatch("duplicate basis labels".into()));
        }
        if !set.contains(&UNIT_LABEL.to_string()) {
            return Err(Error::BadPatch("missing unit label \"1\"".into()));
        }
        if basis.iter().any(|l| l.contains(',') || l.is_empty()) {
            return Err(Error::BadPatch(
                "labels must be nonempty and comma-free".into(),
            ));
        }
        for ((a, b), coeffs) in &products {
            if !set.contains(a) || !set.contains(b) {
                return Err(Error::BadPatch(format!(
                    "product {a},{b} uses unknown labels"
                )));
            }
            for label in coeffs.keys() {
                if !set.contains(label) {
                    return Err(Error::BadPatch(format!(
                        "product {a},{b} references unknown coefficient label {label}"
                    )));
                }
            }
        }
        // unit laws 1*x = x*1 = x: validated when present, inserted when not
        for x in &basis {
            for key in [
                (UNIT_LABEL.to_string(), x.clone()),
                (x.clone(), UNIT_LABEL.to_string()),
            ] {
                let expected: BTreeMap<String, Value> =
                    [(x.clone(), field.one())].into_iter().collect();
                match products.get(&key) {
                    Some(existing) => {
                        let normalized: BTreeMap<String, Value> = existing
                            .iter()
                            .filter(|(_, v)| !field.is_zero(v))
                            .map(|(k, v)| (k.clone(), v.clone()))
                            .collect();
                        if normalized != expected {
                            return Err(Error::BadPatch(format!(
                                "unit law violated at {},{}",
                                key.0, key.1
                            )));
                        }
                    }
                    None => {
                        products.insert(key, expected);
                    }
                }
            }
        }
        Ok(AlgebraPatch {
            field,
            basis,
            products,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn products(&self) -> impl Iterator<Item = (&(String, String), &BTreeMap<String, Value>)> {
        self.products.iter()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraPairCheck {
    pub left: String,
    pub right: String,
    #[serde(with = "crate::json::rat")]
    pub pair_deficiency: Rational,
}

/// Verdict of the epsilon-almost-representation check: the common subspace
/// `V_eps` on which all structure-table products are honored, as a fraction
/// of the total dimension.
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraCheckReport {
    pub dim: usize,
    pub dim_v: usize,
    #[serde(with = "crate::json::rat")]
    pub deficiency: Rational,
    #[serde(with = "crate::json::rat")]
    pub epsilon: Rational,
    pub verdict: bool,
    pub per_pair: Vec<AlgebraPairCheck>,
}

/// Computes `V_eps = intersection of ker(psi(xi) psi(xj) - psi(xi xj))` over
/// the structure table and compares the deficiency `(n - dim V_eps)/n`
/// against `eps`. `psi(xi xj)` is expanded linearly through the table.
pub fn algebra_almost_rep_check(
    patch: &AlgebraPatch,
    psi: &BTreeMap<String, Matrix>,
    eps: &Rational,
) -> Result<AlgebraCheckReport> {
    let f = patch.field.clone();
    let mut dim = None;
    for label in &patch.basis {
        let m = psi
            .get(label)
            .ok_or_else(|| Error::BadRep(format!("no matrix bound to {label:?}")))?;
        if m.field() != &f {
            return Err(Error::FieldMismatch);
        }
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        match dim {
            None => dim = Some(m.rows()),
            Some(d) if d != m.rows() => {
                return Err(Error::SizeMismatch {
                    left: d.to_string(),
                    right: m.rows().to_string(),
                })
            }
            _ => {}
        }
    }
    let n = dim.unwrap_or(0);
    if !psi[UNIT_LABEL].is_identity() {
        return Err(Error::BadRep("psi(1) must be the identity".into()));
    }

    let mut differences = Vec::new();
    let mut per_pair = Vec::new();
    for ((a, b), coeffs) in patch.products() {
        let mut expected = Matrix::zero(f.clone(), n, n);
        for (label, c) in coeffs {
            expected = expected.add(&psi[label].scale(c))?;
        }
        let d = psi[a].mul(&psi[b])?.sub(&expected)?;
        let pair_deficiency = Rational::new(
            BigInt::from(n - d.kernel_basis().len()),
            BigInt::from(n.max(1)),
        );
        per_pair.push(AlgebraPairCheck {
            left: a.clone(),
            right: b.clone(),
            pair_deficiency,
        });
        differences.push(d);
    }

    let dim_v = if differences.is_empty() {
        n
    } else {
        Matrix::vstack(&differences)?.kernel_basis().len()
    };
    let deficiency = Rational::new(BigInt::from(n - dim_v), BigInt::from(n.max(1)));
    Ok(AlgebraCheckReport {
        dim: n,
        dim_v,
        verdict: deficiency < *eps,
        deficiency,
        epsilon: eps.clone(),
        per_pair,
    })
}

/// Applies a finitely supported group-algebra element through the `i`-fold
/// tensor power of the representation: `sum_g f(g) phi(g)^{(x) i}`.
pub fn group_algebra_apply(
    rep: &AlmostRep,
    coeffs: &BTreeMap<String, Value>,
    depth: usize,
) -> Result<Matrix> {
    if depth == 0 {
        return Err(Error::OutOfRange("tensor depth must be >= 1".into()));
    }
    let f = rep.field().clone();
    for g in coeffs.keys() {
        if !rep.table.elements().contains(g) {
            return Err(Error::BadRep(format!("support element {g:?} outside E")));
        }
    }
    let size = rep.dim().pow(depth as u32);
    let mut acc = Matrix::zero(f.clone(), size, size);
    for (g, c) in coeffs {
        if f.is_zero(c) {
            continue;
        }
        let base = rep.matrix(g);
        let mut power = base.clone();
        for _ in 1..depth {
            power = power.tensor(base)?;
        }
        acc = acc.add(&power.scale(c))?;
    }
    Ok(acc)
}

// -- corpus table builders used across modules and tests --

/// Cyclic group of order `k` with labels `e, g, g2, ..., g{k-1}`.
pub fn cyclic_group_table(k: usize) -> PartialGroupTable {
    assert!(k >= 1);
    let label = |i: usize| -> String {
        match i % k {
            0 => IDENTITY_LABEL.to_string(),
            1 => "g".to_string(),
            j => format!("g{j}"),
        }
    };
    let elements: Vec<String> = (0..k).map(label).collect();
    let mut product = BTreeMap::new();
    let mut inverse = BTreeMap::new();
    for i in 0..k {
        for j in 0..k {
            product.insert((label(i), label(j)), label(i + j));
        }
        inverse.insert(label(i), label(k - i % k));
    }
    PartialGroupTable::new(elements, product, inverse).expect("cyclic table is a group")
}

/// Fragment `{-radius, ..., radius}` of the integers; `0` is labeled `e`,
/// products are defined when the sum stays in range.
pub fn integer_fragment_table(radius: i64) -> PartialGroupTable {
    assert!(radius >= 0);
    let label = |i: i64| -> String {
        if i == 0 {
            IDENTITY_LABEL.to_string()
        } else {
            i.to_string()
        }
    };
    let elements: Vec<String> = (-radius..=radius).map(label).collect();
    let mut product = BTreeMap::new();
    let mut inverse = BTreeMap::new();
    for i in -radius..=radius {
        inverse.insert(label(i), label(-i));
        for j in -radius..=radius {
            if (i + j).abs() <= radius {
                product.insert((label(i), label(j)), label(i + j));
            }
        }
    }
    PartialGroupTable::new(elements, product, inverse).expect("integer fragment is consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;

    fn q() -> Field {
        Field::Rationals
    }

    fn z3_regular() -> AlmostRep {
        let table = cyclic_group_table(3);
        let f = q();
        let mut matrices = BTreeMap::new();
        matrices.insert("e".to_string(), Matrix::identity(f.clone(), 3));
        matrices.insert(
            "g".to_string(),
            Permutation::new(vec![1, 2, 0]).unwrap().matrix(&f),
        );
        matrices.insert(
            "g2".to_string(),
            Permutation::new(vec![2, 0, 1]).unwrap().matrix(&f),
        );
        AlmostRep::new(table, f, 3, matrices).unwrap()
    }

    #[test]
    fn regular_z3_certifies() {
        let rep = z3_regular();
        let report = defect_report(&rep).unwrap();
        assert!(report.max_defect.is_zero());
        assert_eq!(report.min_separation, rational_from_ints(2, 3));
        assert!(report.quarter_certified);
        assert!(!report.degenerate);
        assert!(!report.vacuous_separation);
    }

    #[test]
    fn trivial_rep_is_degenerate() {
        let table = cyclic_group_table(2);
        let f = q();
        let matrices: BTreeMap<String, Matrix> = [
            ("e".to_string(), Matrix::identity(f.clone(), 2)),
            ("g".to_string(), Matrix::identity(f.clone(), 2)),
        ]
        .into_iter()
        .collect();
        let rep = AlmostRep::new(table, f, 2, matrices).unwrap();
        let report = defect_report(&rep).unwrap();
        assert!(report.max_defect.is_zero());
        assert!(report.min_separation.is_zero());
        assert!(report.degenerate);
        assert!(!report.quarter_certified);
    }

    #[test]
    fn unipotent_integer_fragment() {
        // phi(k) = [[1,k],[0,1]] on {-1,e,1}: defect 0, separation 1/2
        let table = integer_fragment_table(1);
        let f = q();
        let mut matrices = BTreeMap::new();
        for k in -1i64..=1 {
            let label = if k == 0 {
                "e".to_string()
            } else {
                k.to_string()
            };
            matrices.insert(label, Matrix::from_i64_rows(f.clone(), &[&[1, k], &[0, 1]]));
        }
        let rep = AlmostRep::new(table, f, 2, matrices).unwrap();
        let report = defect_report(&rep).unwrap();
        assert!(report.max_defect.is_zero());
        assert_eq!(report.min_separation, rational_from_ints(1, 2));
        assert!(report.quarter_certified);
    }

    #[test]
    fn vacuous_separation_flagged() {
        let table = PartialGroupTable::new(vec!["e".to_string()], BTreeMap::new(), BTreeMap::new())
            .unwrap();
        let f = q();
        let matrices: BTreeMap<String, Matrix> =
            [("e".to_string(), Matrix::identity(f.clone(), 2))]
                .into_iter()
                .collect();
        let rep = AlmostRep::new(table, f, 2, matrices).unwrap();
        let report = defect_report(&rep).unwrap();
        assert!(report.vacuous_separation);
        assert_eq!(report.min_separation, Rational::one());
    }

    #[test]
    fn defect_report_is_conjugation_invariant() {
        let rep = z3_regular();
        let c = Matrix::from_i64_rows(q(), &[&[1, 2, 0], &[0, 1, 5], &[1, 0, 1]]);
        assert!(c.is_invertible());
        let conj = rep.conjugate(&c).unwrap();
        let a = defect_report(&rep).unwrap();
        let b = defect_report(&conj).unwrap();
        assert_eq!(a.max_defect, b.max_defect);
        assert_eq!(a.min_separation, b.min_separation);
        for (x, y) in a.per_element.iter().zip(&b.per_element) {
            assert_eq!(x.separation, y.separation);
        }
    }

    #[test]
    fn align_exact_rep_keeps_everything() {
        let rep = z3_regular();
        let aligned = align_basis(&rep, &rational_from_ints(1, 4)).unwrap();
        assert_eq!(aligned.agreement_columns, 3);
        let before = defect_report(&rep).unwrap();
        let after = defect_report(&aligned.rep).unwrap();
        assert_eq!(before.max_defect, after.max_defect);
        assert_eq!(before.min_separation, after.min_separation);
    }

    #[test]
    fn align_perturbed_triple() {
        // one perturbed triple of defect 1/n; agreement >= n - |E1|
        let table = cyclic_group_table(2);
        let f = q();
        let phi_g = Matrix::diagonal(
            f.clone(),
            &[
                f.from_i64(-1),
                f.from_i64(-1),
                f.from_i64(-1),
                f.from_i64(2),
            ],
        );
        let matrices: BTreeMap<String, Matrix> = [
            ("e".to_string(), Matrix::identity(f.clone(), 4)),
            ("g".to_string(), phi_g),
        ]
        .into_iter()
        .collect();
        let rep = AlmostRep::new(table, f, 4, matrices).unwrap();
        let report = defect_report(&rep).unwrap();
        assert_eq!(report.max_defect, rational_from_ints(1, 4));

        let triples = rep.table().products().count(); // 4
        let eps = rational_from_ints(3, 2);
        let aligned = align_basis(&rep, &eps).unwrap();
        assert_eq!(aligned.agreement_columns, 3);
        assert!(aligned.agreement_columns >= 4 - triples);
        // in the aligned basis the first dim V columns agree exactly
        let arep = &aligned.rep;
        for ((g, h), gh) in arep.table().products() {
            let lhs = arep.matrix(g).mul(arep.matrix(h)).unwrap();
            let rhs = arep.matrix(gh);
            for j in 0..aligned.agreement_columns {
                for i in 0..arep.dim() {
                    assert_eq!(lhs.at(i, j), rhs.at(i, j));
                }
            }
        }
    }

    #[test]
    fn align_works_over_prime_fields() {
        let f = Field::new(&crate::field::FieldSpec::Prime { p: 101 }).unwrap();
        let table = cyclic_group_table(2);
        let phi_g = Matrix::diagonal(
            f.clone(),
            &[f.from_i64(-1), f.from_i64(-1), f.from_i64(-1), f.from_i64(2)],
        );
        let matrices: BTreeMap<String, Matrix> = [
            ("e".to_string(), Matrix::identity(f.clone(), 4)),
            ("g".to_string(), phi_g),
        ]
        .into_iter()
        .collect();
        let rep = AlmostRep::new(table, f, 4, matrices).unwrap();
        let aligned = align_basis(&rep, &rational_from_ints(3, 2)).unwrap();
        assert_eq!(aligned.agreement_columns, 3);
        let arep = &aligned.rep;
        for ((g, h), gh) in arep.table().products() {
            let lhs = arep.matrix(g).mul(arep.matrix(h)).unwrap();
            for j in 0..aligned.agreement_columns {
                for i in 0..arep.dim() {
                    assert_eq!(lhs.at(i, j), arep.matrix(gh).at(i, j));
                }
            }
        }
    }

    #[test]
    fn align_rejects_large_defect() {
        let table = cyclic_group_table(2);
        let f = q();
        let matrices: BTreeMap<String, Matrix> = [
            ("e".to_string(), Matrix::identity(f.clone(), 2)),
            (
                "g".to_string(),
                Matrix::from_i64_rows(f.clone(), &[&[2, 0], &[0, 3]]),
            ),
        ]
        .into_iter()
        .collect();
        let rep = AlmostRep::new(table, f, 2, matrices).unwrap();
        // phi(g)^2 = diag(4,9) != I: defect 1, eps/|E1| small
        assert!(align_basis(&rep, &rational_from_ints(1, 10)).is_err());
    }

    #[test]
    fn single_element_align_is_identity() {
        let table = PartialGroupTable::new(vec!["e".to_string()], BTreeMap::new(), BTreeMap::new())
            .unwrap();
        let f = q();
        let matrices: BTreeMap<String, Matrix> =
            [("e".to_string(), Matrix::identity(f.clone(), 3))]
                .into_iter()
                .collect();
        let rep = AlmostRep::new(table, f, 3, matrices).unwrap();
        let aligned = align_basis(&rep, &rational_from_ints(1, 2)).unwrap();
        assert_eq!(aligned.agreement_columns, 3);
        assert_eq!(aligned.rep, rep);
    }

    #[test]
    fn group_algebra_apply_examples() {
        // unit element at any depth
        let rep = z3_regular();
        let f = q();
        let unit: BTreeMap<String, Value> = [("e".to_string(), f.one())].into_iter().collect();
        let m = group_algebra_apply(&rep, &unit, 2).unwrap();
        assert!(m.is_identity());
        assert_eq!(m.normalized_rank(), Rational::one());

        // u_1 - 2 u_0 under phi(k) = 2^k I vanishes at depth 1
        let table = integer_fragment_table(1);
        let two_i = Matrix::scalar(f.clone(), 2, &f.from_i64(2));
        let half_i = Matrix::scalar(f.clone(), 2, &Value::Rat(rational_from_ints(1, 2)));
        let matrices: BTreeMap<String, Matrix> = [
            ("e".to_string(), Matrix::identity(f.clone(), 2)),
            ("1".to_string(), two_i),
            ("-1".to_string(), half_i),
        ]
        .into_iter()
        .collect();
        let rep = AlmostRep::new(table, f.clone(), 2, matrices).unwrap();
        let coeffs: BTreeMap<String, Value> = [
            ("1".to_string(), f.one()),
            ("e".to_string(), f.from_i64(-2)),
        ]
        .into_iter()
        .collect();
        let m = group_algebra_apply(&rep, &coeffs, 1).unwrap();
        assert!(m.is_zero());

        // sign representation at depth 2: diag(0,2,2,0)
        let table = cyclic_group_table(2);
        let sign = Matrix::diagonal(f.clone(), &[f.from_i64(1), f.from_i64(-1)]);
        let matrices: BTreeMap<String, Matrix> = [
            ("e".to_string(), Matrix::identity(f.clone(), 2)),
            ("g".to_string(), sign),
        ]
        .into_iter()
        .collect();
        let rep = AlmostRep::new(table, f.clone(), 2, matrices).unwrap();
        let coeffs: BTreeMap<String, Value> = [
            ("e".to_string(), f.one()),
            ("g".to_string(), f.from_i64(-1)),
        ]
        .into_iter()
        .collect();
        let m = group_algebra_apply(&rep, &coeffs, 2).unwrap();
        let expected = Matrix::diagonal(
            f.clone(),
            &[f.from_i64(0), f.from_i64(2), f.from_i64(2), f.from_i64(0)],
        );
        assert_eq!(m, expected);
        assert_eq!(m.normalized_rank(), rational_from_ints(1, 2));
    }

    #[test]
    fn algebra_patch_check() {
        let f = q();
        // exact 2-dim representation of Q[t]/(t^2): 1 -> I, t -> nilpotent
        let basis = vec!["1".to_string(), "t".to_string()];
        let mut products = BTreeMap::new();
        products.insert(
            ("t".to_string(), "t".to_string()),
            BTreeMap::new(), // t*t = 0
        );
        let patch = AlgebraPatch::new(f.clone(), basis, products).unwrap();
        let nil = Matrix::from_i64_rows(f.clone(), &[&[0, 1], &[0, 0]]);
        let psi: BTreeMap<String, Matrix> = [
            ("1".to_string(), Matrix::identity(f.clone(), 2)),
            ("t".to_string(), nil),
        ]
        .into_iter()
        .collect();
        let report = algebra_almost_rep_check(&patch, &psi, &rational_from_ints(1, 8)).unwrap();
        assert!(report.deficiency.is_zero());
        assert!(report.verdict);

        // violating t*t = 0 on a line costs deficiency 1/n
        let bad = Matrix::from_i64_rows(f.clone(), &[&[0, 0], &[1, 0]]);
        let psi2: BTreeMap<String, Matrix> = [
            ("1".to_string(), Matrix::identity(f.clone(), 2)),
            ("t".to_string(), bad),
        ]
        .into_iter()
        .collect();
        let patch2 = AlgebraPatch::new(
            f.clone(),
            vec!["1".to_string(), "t".to_string()],
            [(("t".to_string(), "t".to_string()), BTreeMap::new())]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let report = algebra_almost_rep_check(&patch2, &psi2, &rational_from_ints(1, 8)).unwrap();
        // (bad)^2 = 0 actually; use a genuinely broken one
        assert!(report.deficiency.is_zero());

        let broken = Matrix::from_i64_rows(f.clone(), &[&[0, 1], &[1, 0]]);
        let psi3: BTreeMap<String, Matrix> = [
            ("1".to_string(), Matrix::identity(f.clone(), 2)),
            ("t".to_string(), broken),
        ]
        .into_iter()
        .collect();
        let report = algebra_almost_rep_check(&patch2, &psi3, &rational_from_ints(1, 8)).unwrap();
        assert_eq!(report.deficiency, Rational::one());
        assert!(!report.verdict);
    }

    #[test]
    fn algebra_check_rejects_non_identity_unit() {
        let f = q();
        let patch = AlgebraPatch::new(
            f.clone(),
            vec!["1".to_string(), "t".to_string()],
            BTreeMap::new(),
        )
        .unwrap();
        let psi: BTreeMap<String, Matrix> = [
            (
                "1".to_string(),
                Matrix::from_i64_rows(f.clone(), &[&[2, 0], &[0, 2]]),
            ),
            ("t".to_string(), Matrix::identity(f.clone(), 2)),
        ]
        .into_iter()
        .collect();
        assert!(matches!(
            algebra_almost_rep_check(&patch, &psi, &rational_from_ints(1, 2)),
            Err(Error::BadRep(_))
        ));
    }

    #[test]
    fn group_algebra_apply_rejects_foreign_support() {
        let rep = z3_regular();
        let f = q();
        let coeffs: BTreeMap<String, Value> = [("h".to_string(), f.one())].into_iter().collect();
        assert!(matches!(
            group_algebra_apply(&rep, &coeffs, 1),
            Err(Error::BadRep(_))
        ));
        let unit: BTreeMap<String, Value> = [("e".to_string(), f.one())].into_iter().collect();
        assert!(group_algebra_apply(&rep, &unit, 0).is_err());
    }

    #[test]
    fn deficiency_monotone_under_condition_removal() {
        let f = q();
        let mut products = BTreeMap::new();
        products.insert(("t".to_string(), "t".to_string()), BTreeMap::new());
        let full =
            AlgebraPatch::new(f.clone(), vec!["1".to_string(), "t".to_string()], products).unwrap();
        let reduced = AlgebraPatch::new(
            f.clone(),
            vec!["1".to_string(), "t".to_string()],
            BTreeMap::new(),
        )
        .unwrap();
        let broken = Matrix::from_i64_rows(f.clone(), &[&[0, 1], &[1, 0]]);
        let psi: BTreeMap<String, Matrix> = [
            ("1".to_string(), Matrix::identity(f.clone(), 2)),
            ("t".to_string(), broken),
        ]
        .into_iter()
        .collect();
        let eps = rational_from_ints(1, 2);
        let with = algebra_almost_rep_check(&full, &psi, &eps).unwrap();
        let without = algebra_almost_rep_check(&reduced, &psi, &eps).unwrap();
        assert!(without.deficiency <= with.deficiency);
    }

    #[test]
    fn table_validation_catches_breakage() {
        // e*g must be g
        let bad = PartialGroupTable::new(
            vec!["e".to_string(), "g".to_string()],
            [(("e".to_string(), "g".to_string()), "e".to_string())]
                .into_iter()
                .collect(),
            BTreeMap::new(),
        );
        assert!(bad.is_err());

        // broken associativity: (g*g)*g != g*(g*g)
        let bad = PartialGroupTable::new(
            vec!["e".to_string(), "g".to_string(), "h".to_string()],
            [
                (("g".to_string(), "g".to_string()), "h".to_string()),
                (("h".to_string(), "g".to_string()), "e".to_string()),
                (("g".to_string(), "h".to_string()), "g".to_string()),
            ]
            .into_iter()
            .collect(),
            BTreeMap::new(),
        );
        assert!(bad.is_err());

        // inverse inconsistent with product
        let bad = PartialGroupTable::new(
            vec!["e".to_string(), "g".to_string()],
            [(("g".to_string(), "g".to_string()), "g".to_string())]
                .into_iter()
                .collect(),
            [("g".to_string(), "g".to_string())].into_iter().collect(),
        );
        assert!(bad.is_err());
    }
}
