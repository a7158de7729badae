//! Generators of explicit representations: regular representations of
//! finite groups, block representations of extensions with amenable quotient
//! (built from a validated cocycle), commutator witness families in
//! `GL_n`, and Folner left-multiplication almost-representations of
//! algebras.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::certify::{
    algebra_almost_rep_check, defect_report, AlgebraCheckReport, AlgebraPatch, AlmostRep,
    PartialGroupTable,
};
use crate::error::{Error, Result};
use crate::field::{rational_from_ints, Field, Rational, Value};
use crate::matrix::Matrix;
use crate::perm::Permutation;

/// Left-translation permutation representation of a total finite group:
/// exact (defect 0), with separation of `g` equal to `1 - cyc(lambda_g)/|G|`.
pub fn regular_rep(table: &PartialGroupTable, field: &Field) -> Result<AlmostRep> {
    table.require_total_group()?;
    let elements = table.elements();
    let index: BTreeMap<&String, usize> =
        elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let n = elements.len();
    let mut matrices = BTreeMap::new();
    for g in elements {
        let mut images = vec![0; n];
        for (j, h) in elements.iter().enumerate() {
            let gh = table.product(g, h).expect("total table");
            images[j] = index[gh];
        }
        let translation = Permutation::new(images)
            .map_err(|_| Error::BadTable(format!("left translation by {g} is not a bijection")))?;
        matrices.insert(g.clone(), translation.matrix(field));
    }
    AlmostRep::new(table.clone(), field.clone(), n, matrices)
}

/// Data of a group extension with finite quotient, ready for the block
/// construction: the quotient `Q` (the full Folner set), a lift of `Q` into
/// the big group, the projection of the fragment onto `Q`, the `H`-valued
/// cocycle on `fragment x Q`, and matrices for the needed cocycle values.
#[derive(Debug, Clone)]
pub struct ExtensionData {
    pub quotient: PartialGroupTable,
    /// `sigma : Q -> G` as labels; carried for provenance, not consumed.
    pub lift: BTreeMap<String, String>,
    /// Coset of each fragment element in `Q`.
    pub projection: BTreeMap<String, String>,
    /// `alpha(g, gamma)` as labels of the `H`-representation's table.
    pub cocycle: BTreeMap<(String, String), String>,
    pub h_rep: AlmostRep,
}

#[derive(Serialize, Deserialize)]
struct ExtensionJson {
    quotient: PartialGroupTable,
    lift: BTreeMap<String, String>,
    projection: BTreeMap<String, String>,
    /// `"g,gamma" -> h`
    cocycle: BTreeMap<String, String>,
    h_rep: AlmostRep,
}

impl Serialize for ExtensionData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExtensionJson {
            quotient: self.quotient.clone(),
            lift: self.lift.clone(),
            projection: self.projection.clone(),
            cocycle: self
                .cocycle
                .iter()
                .map(|((g, gamma), h)| (format!("{g},{gamma}"), h.clone()))
                .collect(),
            h_rep: self.h_rep.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtensionData {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let j = ExtensionJson::deserialize(d)?;
        let mut cocycle = BTreeMap::new();
        for (key, h) in j.cocycle {
            let (g, gamma) = key
                .split_once(',')
                .ok_or_else(|| D::Error::custom(format!("bad cocycle key {key:?}")))?;
            cocycle.insert((g.to_string(), gamma.to_string()), h);
        }
        Ok(ExtensionData {
            quotient: j.quotient,
            lift: j.lift,
            projection: j.projection,
            cocycle,
            h_rep: j.h_rep,
        })
    }
}

impl ExtensionData {
    fn alpha(&self, g: &str, gamma: &str) -> Result<&String> {
        self.cocycle
            .get(&(g.to_string(), gamma.to_string()))
            .ok_or_else(|| {
                Error::BadExtension(format!("missing cocycle value alpha({g}, {gamma})"))
            })
    }

    fn act(&self, g: &str, gamma: &str) -> Result<String> {
        let q = self
            .projection
            .get(g)
            .ok_or_else(|| Error::BadExtension(format!("missing projection of {g}")))?;
        self.quotient
            .product(q, gamma)
            .cloned()
            .ok_or_else(|| Error::BadExtension(format!("quotient product {q}*{gamma} undefined")))
    }

    /// Exhaustive cocycle identity check over the fragment's defined
    /// triples: `alpha(g1 g2, gamma) = alpha(g1, g2 gamma) alpha(g2, gamma)`
    /// wherever the `H`-side product is defined.
    pub fn validate(&self, fragment: &PartialGroupTable) -> Result<()> {
        self.quotient.require_total_group()?;
        for ((g1, g2), g12) in fragment.products() {
            for gamma in self.quotient.elements() {
                let right = self.alpha(g2, gamma)?;
                let left = self.alpha(g1, &self.act(g2, gamma)?)?;
                let expected = self.alpha(g12, gamma)?;
                if let Some(product) = self.h_rep.table().product(left, right) {
                    if product != expected {
                        return Err(Error::BadExtension(format!(
                            "cocycle identity fails at ({g1}, {g2}, {gamma}): \
                             {left}*{right} = {product}, expected {expected}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionElementRow {
    pub label: String,
    pub in_kernel_subgroup: bool,
    #[serde(with = "crate::json::rat")]
    pub separation: Rational,
    /// Provable lower bound: the minimum `H`-separation when the element
    /// projects to the quotient identity, else the orbit-counting kernel
    /// bound (1/2 for a free action).
    #[serde(with = "crate::json::rat")]
    pub bound: Rational,
    pub bound_holds: bool,
    pub quotient_fixed_points: usize,
    /// The separation analysis only covers quotient actions that fix every
    /// point or none; rows with partial fixed points carry the provable
    /// kernel bound and this flag.
    pub unspecified_case: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub dim: usize,
    #[serde(with = "crate::json::rat")]
    pub h_defect: Rational,
    #[serde(with = "crate::json::rat")]
    pub defect: Rational,
    /// `defect(psi) <= 2 defect(phi)`.
    pub defect_bound_holds: bool,
    /// `rho(psi(g)) = 1` for every `g` (full Folner set, so every block row
    /// is hit exactly once).
    pub full_rank: bool,
    pub per_element: Vec<ExtensionElementRow>,
}

/// Block representation of the fragment: `psi(g)` carries
/// `phi(alpha(g, gamma))` in block position `(g gamma, gamma)`, blocks
/// ordered by the fixed enumeration of `Q`.
pub fn amenable_extension_rep(
    data: &ExtensionData,
    fragment: &PartialGroupTable,
) -> Result<(AlmostRep, ExtensionReport)> {
    data.validate(fragment)?;
    let field = data.h_rep.field().clone();
    let n = data.h_rep.dim();
    let q_elements = data.quotient.elements();
    let q_index: BTreeMap<&String, usize> =
        q_elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let q = q_elements.len();
    let dim = n * q;

    let mut matrices = BTreeMap::new();
    for g in fragment.elements() {
        let mut psi = Matrix::zero(field.clone(), dim, dim);
        for gamma in q_elements {
            let col = q_index[gamma];
            let row = q_index[&data.act(g, gamma)?];
            let block = data.h_rep.matrix(data.alpha(g, gamma)?);
            for i in 0..n {
                for j in 0..n {
                    psi.set(row * n + i, col * n + j, block.at(i, j).clone());
                }
            }
        }
        matrices.insert(g.clone(), psi);
    }

    let full_rank = matrices.values().all(|m| m.is_invertible());
    let rep = AlmostRep::new(fragment.clone(), field.clone(), dim, matrices)?;

    let h_report = defect_report(&data.h_rep)?;
    let psi_report = defect_report(&rep)?;
    let two = Rational::from_integer(BigInt::from(2));
    let defect_bound_holds = psi_report.max_defect <= &two * &h_report.max_defect;

    let identity = Matrix::identity(field.clone(), dim);
    let q_identity = data.quotient.identity();
    let mut per_element = Vec::new();
    for g in fragment.elements() {
        if g == fragment.identity() {
            continue;
        }
        let separation = identity.rank_distance(rep.matrix(g))?;
        let in_h = data.projection[g] == q_identity;
        let fixed: Vec<&String> = q_elements
            .iter()
            .filter(|gamma| data.act(g, gamma).map(|im| &im == *gamma).unwrap_or(false))
            .collect();
        let (bound, unspecified_case) = if in_h {
            (h_report.min_separation.clone(), false)
        } else {
            // kernel count: each orbit of length >= 2 contributes at most n
            // dimensions; each fixed gamma contributes ker(I - phi(alpha))
            let mut seen: BTreeSet<String> = BTreeSet::new();
            let mut orbit_count = 0usize;
            for start in q_elements {
                if seen.contains(start) {
                    continue;
                }
                orbit_count += 1;
                let mut cur = start.clone();
                while seen.insert(cur.clone()) {
                    cur = data.act(g, &cur)?;
                }
            }
            let moving_orbits = orbit_count - fixed.len();
            let mut kernel_dims = BigInt::from(moving_orbits * n);
            for gamma in &fixed {
                let block = data.h_rep.matrix(data.alpha(g, gamma)?);
                let identity_small = Matrix::identity(field.clone(), n);
                let ker = n - identity_small.sub(block)?.rank();
                kernel_dims += BigInt::from(ker);
            }
            let bound = Rational::one() - Rational::new(kernel_dims, BigInt::from(dim));
            (bound, !fixed.is_empty())
        };
        per_element.push(ExtensionElementRow {
            label: g.clone(),
            in_kernel_subgroup: in_h,
            bound_holds: separation >= bound,
            separation,
            bound,
            quotient_fixed_points: fixed.len(),
            unspecified_case,
        });
    }

    let report = ExtensionReport {
        dim,
        h_defect: h_report.max_defect,
        defect: psi_report.max_defect,
        defect_bound_holds,
        full_rank,
        per_element,
    };
    Ok((rep, report))
}

/// Commutator witness family in `GL_n`: pairs `(g_i, h_i)`, `i = 1..l`, such
/// that `g_i` and `h_j` commute exactly for `i < j` while for `i >= j` the
/// commutator stays at rank distance `(3^l - 3^{l-1})/n >= 2/9` from the
/// identity. Needs `3^l <= n`; the construction tensors transposition
/// matrices on `l` ternary legs and pads with the identity.
pub struct WitnessFamily {
    pub n: usize,
    pub l: usize,
    pub pairs: Vec<(Matrix, Matrix)>,
    pub table: Vec<WitnessRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRow {
    pub i: usize,
    pub j: usize,
    pub commute: bool,
    #[serde(with = "crate::json::rat")]
    pub distance: Rational,
    /// Expected verdict: exact commutation for `i < j`, distance at least
    /// 2/9 (and exactly `(3^l - 3^{l-1})/n`) for `i >= j`.
    pub verdict: bool,
}

pub fn commutator_witnesses(n: usize, l: usize, field: &Field) -> Result<WitnessFamily> {
    if l == 0 {
        return Err(Error::OutOfRange("need l >= 1".into()));
    }
    let base = 3usize
        .checked_pow(l as u32)
        .ok_or_else(|| Error::OutOfRange("3^l overflows".into()))?;
    if base > n {
        return Err(Error::OutOfRange(format!("3^{l} = {base} exceeds n = {n}")));
    }
    let swap01 = Permutation::new(vec![1, 0, 2]).unwrap();
    let swap12 = Permutation::new(vec![0, 2, 1]).unwrap();
    let id3 = Permutation::identity(3);
    let pad = Permutation::identity(n - base);

    let leg = |i: usize, active: &Permutation, repeat_left: bool| -> Permutation {
        // legs 1..l; for g: active on legs 1..=i, identity after; for h:
        // identity before leg i, active on leg i, identity after
        let mut p = Permutation::identity(1);
        for pos in 1..=l {
            let factor = if repeat_left {
                if pos <= i {
                    active
                } else {
                    &id3
                }
            } else if pos == i {
                active
            } else {
                &id3
            };
            p = p.tensor(factor);
        }
        p.direct_sum(&pad)
    };

    let mut pairs = Vec::new();
    let mut perms = Vec::new();
    for i in 1..=l {
        let g = leg(i, &swap01, true);
        let h = leg(i, &swap12, false);
        pairs.push((g.matrix(field), h.matrix(field)));
        perms.push((g, h));
    }

    let expected = rational_from_ints((base - base / 3) as i64, n as i64);
    let gamma = rational_from_ints(2, 9);
    let identity = Matrix::identity(field.clone(), n);
    let mut table = Vec::new();
    for (gi, (g, _)) in perms.iter().enumerate() {
        for (hj, (_, h)) in perms.iter().enumerate() {
            let commutator = g.compose(h)?.compose(&g.inverse())?.compose(&h.inverse())?;
            let commutator_matrix = commutator.matrix(field);
            let commute = commutator_matrix.is_identity();
            let distance = identity.rank_distance(&commutator_matrix)?;
            let (i, j) = (gi + 1, hj + 1);
            let verdict = if i < j {
                commute && distance.is_zero()
            } else {
                distance == expected && distance >= gamma
            };
            table.push(WitnessRow {
                i,
                j,
                commute,
                distance,
                verdict,
            });
        }
    }

    Ok(WitnessFamily { n, l, pairs, table })
}

/// Caller-supplied Folner action: for each basis element `a` of the patch,
/// the columns of left multiplication on the sub-basis of `S` where the
/// product stays inside `S`. Unlisted columns are zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FolnerData {
    pub subspace_basis: Vec<String>,
    /// `a -> (s -> coefficient map of a*s over the subspace basis)`.
    pub actions: BTreeMap<String, BTreeMap<String, BTreeMap<String, String>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FolnerElementRow {
    pub label: String,
    #[serde(with = "crate::json::rat")]
    pub rho: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct FolnerReport {
    pub check: AlgebraCheckReport,
    pub per_element: Vec<FolnerElementRow>,
    /// Minimum `rho(phi(a))` over the patch basis.
    #[serde(with = "crate::json::rat")]
    pub min_rho: Rational,
}

/// Builds `phi(a) : S -> S` as left multiplication on the supplied
/// subspace and zero on a complement, then runs the algebra certifier.
/// The unit acts as the identity and may be omitted from the actions.
pub fn folner_left_mult_rep(
    patch: &AlgebraPatch,
    data: &FolnerData,
    eps: &Rational,
) -> Result<(BTreeMap<String, Matrix>, FolnerReport)> {
    let field = patch.field().clone();
    let s_basis = &data.subspace_basis;
    let dim = s_basis.len();
    let s_index: BTreeMap<&String, usize> =
        s_basis.iter().enumerate().map(|(i, s)| (s, i)).collect();
    if dim == 0 {
        return Err(Error::BadPatch("empty subspace basis".into()));
    }

    let mut psi = BTreeMap::new();
    for a in patch.basis() {
        if a == crate::certify::UNIT_LABEL && !data.actions.contains_key(a) {
            psi.insert(a.clone(), Matrix::identity(field.clone(), dim));
            continue;
        }
        let action = data
            .actions
            .get(a)
            .ok_or_else(|| Error::BadPatch(format!("no action supplied for {a}")))?;
        let mut m = Matrix::zero(field.clone(), dim, dim);
        for (s, coeffs) in action {
            let col = *s_index
                .get(s)
                .ok_or_else(|| Error::BadPatch(format!("action column {s} outside S")))?;
            for (target, coeff) in coeffs {
                let row = *s_index.get(target).ok_or_else(|| {
                    Error::BadPatch(format!("action of {a} on {s} leaves S (hits {target})"))
                })?;
                let value = field.parse_value(coeff)?;
                m.set(row, col, value);
            }
        }
        psi.insert(a.clone(), m);
    }

    let check = algebra_almost_rep_check(patch, &psi, eps)?;
    let mut per_element = Vec::new();
    let mut min_rho: Option<Rational> = None;
    for a in patch.basis() {
        let rho = psi[a].normalized_rank();
        if min_rho.as_ref().map(|m| rho < *m).unwrap_or(true) {
            min_rho = Some(rho.clone());
        }
        per_element.push(FolnerElementRow {
            label: a.clone(),
            rho,
        });
    }
    let report = FolnerReport {
        check,
        per_element,
        min_rho: min_rho.unwrap_or_else(Rational::one),
    };
    Ok((psi, report))
}

// -- bundled corpus builders --

/// Degree label: `1`, `x`, `x2`, ...
fn monomial_label(i: usize) -> String {
    match i {
        0 => "1".to_string(),
        1 => "x".to_string(),
        d => format!("x{d}"),
    }
}

/// Truncated-polynomial Folner corpus: `L = span(1, x, ..., x^max_degree)`
/// inside the polynomial algebra, `S = span(1, ..., x^{window-1})`, with
/// `phi(x^d)` shifting degrees by `d` where the product stays below the
/// window and killing the top `d` monomials.
pub fn truncated_polynomial_folner(
    window: usize,
    max_degree: usize,
    field: &Field,
) -> Result<(AlgebraPatch, FolnerData)> {
    if window == 0 {
        return Err(Error::BadPatch("window must be positive".into()));
    }
    let basis: Vec<String> = (0..=max_degree).map(monomial_label).collect();
    let mut products = BTreeMap::new();
    for i in 0..=max_degree {
        for j in 0..=max_degree {
            if i + j <= max_degree {
                let coeffs: BTreeMap<String, Value> =
                    [(monomial_label(i + j), field.one())].into_iter().collect();
                products.insert((monomial_label(i), monomial_label(j)), coeffs);
            }
        }
    }
    let patch = AlgebraPatch::new(field.clone(), basis.clone(), products)?;

    let subspace_basis: Vec<String> = (0..window).map(monomial_label).collect();
    let mut actions = BTreeMap::new();
    for d in 0..=max_degree {
        let mut columns = BTreeMap::new();
        for i in 0..window {
            if i + d < window {
                let coeffs: BTreeMap<String, String> = [(monomial_label(i + d), "1".to_string())]
                    .into_iter()
                    .collect();
                columns.insert(monomial_label(i), coeffs);
            }
        }
        actions.insert(monomial_label(d), columns);
    }
    Ok((
        patch,
        FolnerData {
            subspace_basis,
            actions,
        },
    ))
}

/// The bundled extension corpus: the integers as an index-2 extension of the
/// even integers, quotient `Z/2`, lift `sigma(e) = 0`, `sigma(g) = 1`, and
/// `phi(2m)` the unipotent block `[[1, m], [0, 1]]`. The fragment is
/// `{-radius, ..., radius}`.
pub fn integer_extension_example(
    radius: i64,
    field: &Field,
) -> Result<(ExtensionData, PartialGroupTable)> {
    let fragment = crate::certify::integer_fragment_table(radius);
    let quotient = crate::certify::cyclic_group_table(2);

    let h_label = |k: i64| -> String {
        if k == 0 {
            "e".to_string()
        } else {
            k.to_string()
        }
    };
    // H-values live in {-2 radius, ..., 2 radius} intersect 2Z
    let h_radius = radius; // alpha values stay within +-(radius+1), rounded to even
    let max_h = 2 * ((h_radius + 1) / 2 + 1);
    let h_elements: Vec<String> = (-max_h..=max_h)
        .filter(|k| k % 2 == 0)
        .map(h_label)
        .collect();
    let mut h_product = BTreeMap::new();
    let mut h_inverse = BTreeMap::new();
    for a in (-max_h..=max_h).step_by(2) {
        h_inverse.insert(h_label(a), h_label(-a));
        for b in (-max_h..=max_h).step_by(2) {
            if (a + b).abs() <= max_h {
                h_product.insert((h_label(a), h_label(b)), h_label(a + b));
            }
        }
    }
    let h_table = PartialGroupTable::new(h_elements.clone(), h_product, h_inverse)?;
    let mut h_matrices = BTreeMap::new();
    for label in &h_elements {
        let k = if label == "e" {
            0
        } else {
            label.parse::<i64>().expect("numeric label")
        };
        h_matrices.insert(
            label.clone(),
            Matrix::from_i64_rows(field.clone(), &[&[1, k / 2], &[0, 1]]),
        );
    }
    let h_rep = AlmostRep::new(h_table, field.clone(), 2, h_matrices)?;

    let g_label = |k: i64| -> String {
        if k == 0 {
            "e".to_string()
        } else {
            k.to_string()
        }
    };
    let sigma = |q: &str| -> i64 {
        if q == "e" {
            0
        } else {
            1
        }
    };
    let mut lift = BTreeMap::new();
    lift.insert("e".to_string(), g_label(0));
    lift.insert("g".to_string(), g_label(1));

    let mut projection = BTreeMap::new();
    let mut cocycle = BTreeMap::new();
    for k in -radius..=radius {
        let q = if k.rem_euclid(2) == 0 { "e" } else { "g" };
        projection.insert(g_label(k), q.to_string());
        for gamma in ["e", "g"] {
            // alpha(k, gamma) = -sigma(k + gamma) + k + sigma(gamma)
            let acted = if (k + sigma(gamma)).rem_euclid(2) == 0 {
                "e"
            } else {
                "g"
            };
            let alpha = -sigma(acted) + k + sigma(gamma);
            cocycle.insert((g_label(k), gamma.to_string()), h_label(alpha));
        }
    }

    Ok((
        ExtensionData {
            quotient,
            lift,
            projection,
            cocycle,
            h_rep,
        },
        fragment,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::cyclic_group_table;

    fn q() -> Field {
        Field::Rationals
    }

    #[test]
    fn regular_rep_examples() {
        let rep = regular_rep(&cyclic_group_table(2), &q()).unwrap();
        assert_eq!(
            rep.matrix("g"),
            &Matrix::from_i64_rows(q(), &[&[0, 1], &[1, 0]])
        );
        let report = defect_report(&rep).unwrap();
        assert!(report.max_defect.is_zero());
        assert_eq!(report.min_separation, rational_from_ints(1, 2));

        let rep = regular_rep(&cyclic_group_table(3), &q()).unwrap();
        let report = defect_report(&rep).unwrap();
        assert!(report.max_defect.is_zero());
        assert_eq!(report.min_separation, rational_from_ints(2, 3));
        for row in &report.per_element {
            assert_eq!(row.separation, rational_from_ints(2, 3));
        }

        let trivial = regular_rep(&cyclic_group_table(1), &q()).unwrap();
        assert_eq!(trivial.dim(), 1);
        assert!(trivial.matrix("e").is_identity());

        // a partial table is rejected
        assert!(regular_rep(&crate::certify::integer_fragment_table(1), &q()).is_err());
    }

    #[test]
    fn extension_example_matches_block_form() {
        let f = q();
        let (data, fragment) = integer_extension_example(2, &f).unwrap();
        let (rep, report) = amenable_extension_rep(&data, &fragment).unwrap();
        assert_eq!(rep.dim(), 4);
        assert!(report.full_rank);
        assert!(report.defect.is_zero());
        assert!(report.defect_bound_holds);

        // psi(1) = [[0, phi(2)], [I, 0]] in 2x2 blocks
        let psi1 = rep.matrix("1");
        let expected = Matrix::from_i64_rows(
            f.clone(),
            &[&[0, 0, 1, 1], &[0, 0, 0, 1], &[1, 0, 0, 0], &[0, 1, 0, 0]],
        );
        assert_eq!(psi1, &expected);
        let row1 = report.per_element.iter().find(|r| r.label == "1").unwrap();
        assert_eq!(row1.separation, rational_from_ints(3, 4));
        assert!(!row1.in_kernel_subgroup);
        assert_eq!(row1.bound, rational_from_ints(1, 2));
        assert!(row1.bound_holds);
        assert!(!row1.unspecified_case);

        // psi(2) = diag(phi(2), phi(2)): separation = rho(I - phi(2)) = 1/2
        let row2 = report.per_element.iter().find(|r| r.label == "2").unwrap();
        assert!(row2.in_kernel_subgroup);
        assert_eq!(row2.separation, rational_from_ints(1, 2));
        assert!(row2.bound_holds);

        assert!(rep.matrix("e").is_identity());
    }

    #[test]
    fn extension_with_order_three_quotient() {
        // direct product of the integers with Z/3: the cocycle is constant
        // in the quotient coordinate, so alpha((k,q), gamma) = k
        let f = q();
        let label = |k: i64, qq: i64| -> String {
            if k == 0 && qq == 0 {
                "e".to_string()
            } else {
                format!("{k}|{qq}")
            }
        };
        let mut elements = Vec::new();
        let mut product = BTreeMap::new();
        let mut inverse = BTreeMap::new();
        for k in -1i64..=1 {
            for qq in 0i64..3 {
                elements.push(label(k, qq));
                inverse.insert(label(k, qq), label(-k, (3 - qq) % 3));
                for k2 in -1i64..=1 {
                    for q2 in 0i64..3 {
                        if (k + k2).abs() <= 1 {
                            product.insert(
                                (label(k, qq), label(k2, q2)),
                                label(k + k2, (qq + q2) % 3),
                            );
                        }
                    }
                }
            }
        }
        let fragment = PartialGroupTable::new(elements.clone(), product, inverse).unwrap();

        let h_table = crate::certify::integer_fragment_table(2);
        let mut h_matrices = BTreeMap::new();
        for k in -2i64..=2 {
            let l = if k == 0 { "e".to_string() } else { k.to_string() };
            h_matrices.insert(l, Matrix::from_i64_rows(f.clone(), &[&[1, k], &[0, 1]]));
        }
        let h_rep = AlmostRep::new(h_table, f.clone(), 2, h_matrices).unwrap();

        let quotient = crate::certify::cyclic_group_table(3);
        let q_label = |qq: i64| -> String {
            match qq {
                0 => "e".to_string(),
                1 => "g".to_string(),
                _ => "g2".to_string(),
            }
        };
        let mut projection = BTreeMap::new();
        let mut cocycle = BTreeMap::new();
        let mut lift = BTreeMap::new();
        for qq in 0i64..3 {
            lift.insert(q_label(qq), label(0, qq));
        }
        for k in -1i64..=1 {
            for qq in 0i64..3 {
                projection.insert(label(k, qq), q_label(qq));
                for gamma in 0i64..3 {
                    let h = if k == 0 { "e".to_string() } else { k.to_string() };
                    cocycle.insert((label(k, qq), q_label(gamma)), h);
                }
            }
        }
        let data = ExtensionData {
            quotient,
            lift,
            projection,
            cocycle,
            h_rep,
        };

        let (rep, report) = amenable_extension_rep(&data, &fragment).unwrap();
        assert_eq!(rep.dim(), 6);
        assert!(report.defect.is_zero());
        assert!(report.full_rank);

        // (0,1): block 3-cycle of identities, bound 2/3 attained exactly
        let row = report
            .per_element
            .iter()
            .find(|r| r.label == "0|1")
            .unwrap();
        assert!(!row.in_kernel_subgroup);
        assert_eq!(row.quotient_fixed_points, 0);
        assert_eq!(row.bound, rational_from_ints(2, 3));
        assert_eq!(row.separation, rational_from_ints(2, 3));
        assert!(!row.unspecified_case);

        // (1,1): cyclic blocks of phi(1), separation 5/6
        let row = report
            .per_element
            .iter()
            .find(|r| r.label == "1|1")
            .unwrap();
        assert_eq!(row.separation, rational_from_ints(5, 6));
        assert!(row.bound_holds);

        // (1,0) lies over the quotient identity: the H bound applies
        let row = report
            .per_element
            .iter()
            .find(|r| r.label == "1|0")
            .unwrap();
        assert!(row.in_kernel_subgroup);
        assert_eq!(row.separation, rational_from_ints(1, 2));
        assert_eq!(row.bound, rational_from_ints(1, 2));

        // the data survives a JSON round trip
        let encoded = serde_json::to_string(&data).unwrap();
        let decoded: ExtensionData = serde_json::from_str(&encoded).unwrap();
        assert_eq!(serde_json::to_string(&decoded).unwrap(), encoded);
        let (rep2, _) = amenable_extension_rep(&decoded, &fragment).unwrap();
        assert_eq!(rep2, rep);
    }

    #[test]
    fn extension_rejects_broken_cocycle() {
        let f = q();
        let (mut data, fragment) = integer_extension_example(2, &f).unwrap();
        data.cocycle
            .insert(("2".to_string(), "e".to_string()), "-2".to_string());
        assert!(matches!(
            amenable_extension_rep(&data, &fragment),
            Err(Error::BadExtension(_))
        ));
    }

    #[test]
    fn extension_rejects_missing_value() {
        let f = q();
        let (mut data, fragment) = integer_extension_example(1, &f).unwrap();
        data.cocycle.remove(&("1".to_string(), "g".to_string()));
        assert!(matches!(
            amenable_extension_rep(&data, &fragment),
            Err(Error::BadExtension(_))
        ));
    }

    #[test]
    fn witnesses_at_the_base_size() {
        let family = commutator_witnesses(3, 1, &q()).unwrap();
        assert_eq!(family.pairs.len(), 1);
        let row = &family.table[0];
        assert_eq!(row.distance, rational_from_ints(2, 3));
        assert!(row.verdict);
    }

    #[test]
    fn witnesses_commute_on_disjoint_legs() {
        let family = commutator_witnesses(9, 2, &q()).unwrap();
        for row in &family.table {
            assert!(row.verdict, "row {} {}", row.i, row.j);
            if row.i < row.j {
                assert!(row.commute);
                assert!(row.distance.is_zero());
            } else {
                assert_eq!(row.distance, rational_from_ints(6, 9));
            }
        }
    }

    #[test]
    fn witnesses_padded_distance() {
        // n = 10, l = 2: distance (9 - 3)/10 = 3/5 >= 2/9
        let family = commutator_witnesses(10, 2, &q()).unwrap();
        let row = family.table.iter().find(|r| r.i == 2 && r.j == 2).unwrap();
        assert_eq!(row.distance, rational_from_ints(3, 5));
        assert!(row.verdict);
        assert!(commutator_witnesses(8, 2, &q()).is_err());
    }

    #[test]
    fn folner_truncated_polynomials() {
        let f = q();
        let (patch, data) = truncated_polynomial_folner(8, 1, &f).unwrap();
        let eps = rational_from_ints(1, 4);
        let (psi, report) = folner_left_mult_rep(&patch, &data, &eps).unwrap();
        assert_eq!(psi["x"].rows(), 8);
        let x_row = report.per_element.iter().find(|r| r.label == "x").unwrap();
        assert_eq!(x_row.rho, rational_from_ints(7, 8));
        assert!(report.check.deficiency <= rational_from_ints(2, 8));
        assert!(report.check.verdict);

        // unit acts as the identity
        assert!(psi["1"].is_identity());
    }

    #[test]
    fn folner_minimal_window() {
        let f = q();
        let (patch, data) = truncated_polynomial_folner(2, 1, &f).unwrap();
        let eps = Rational::one() + Rational::one();
        let (psi, report) = folner_left_mult_rep(&patch, &data, &eps).unwrap();
        assert_eq!(psi["x"].rows(), 2);
        assert!(report.check.deficiency <= Rational::one());
        assert!(report.check.verdict);
    }

    #[test]
    fn folner_rejects_leaving_actions() {
        let f = q();
        let (patch, mut data) = truncated_polynomial_folner(4, 1, &f).unwrap();
        data.actions.get_mut("x").unwrap().insert(
            "x3".to_string(),
            [("x9".to_string(), "1".to_string())].into_iter().collect(),
        );
        assert!(matches!(
            folner_left_mult_rep(&patch, &data, &rational_from_ints(1, 2)),
            Err(Error::BadPatch(_))
        ));
    }

    #[test]
    fn folner_deeper_patch_still_exact() {
        // L = span(1, x, x^2) with window 8: products through x^2 certified
        let f = q();
        let (patch, data) = truncated_polynomial_folner(8, 2, &f).unwrap();
        let eps = rational_from_ints(1, 2);
        let (psi, report) = folner_left_mult_rep(&patch, &data, &eps).unwrap();
        assert!(report.check.verdict);
        assert_eq!(psi["x2"].normalized_rank(), rational_from_ints(6, 8));
    }
}
