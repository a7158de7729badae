//! Permutations with the normalized Hamming metric and their embedding as
//! permutation matrices, where the rank metric satisfies the exact cycle and
//! fixed-point formulas
//! `rho(Id - A_p) = 1 - cyc(p)/n` and `d_Hamm(id, p) = 1 - fix(p)/n`,
//! giving the sandwich `rho <= d_Hamm <= 2 rho`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::certify::{AlmostRep, PartialGroupTable};
use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::matrix::Matrix;

/// A permutation of `{0, ..., n-1}` in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PermJson", into = "PermJson")]
pub struct Permutation {
    images: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PermJson {
    perm: Vec<usize>,
}

impl TryFrom<PermJson> for Permutation {
    type Error = Error;
    fn try_from(j: PermJson) -> Result<Permutation> {
        Permutation::new(j.perm)
    }
}

impl From<Permutation> for PermJson {
    fn from(p: Permutation) -> PermJson {
        PermJson { perm: p.images }
    }
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Permutation> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::BadPermutation(format!(
                    "{images:?} is not a bijection of 0..{n}"
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Permutation {
        Permutation {
            images: (0..n).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self` after `other`: `(p.compose(q))(i) = p(q(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::SizeMismatch {
                left: self.degree().to_string(),
                right: other.degree().to_string(),
            });
        }
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Permutation { images }
    }

    /// Acts on the product index space: `(p (x) q)(i*m + j) = p(i)*m + q(j)`,
    /// matching the Kronecker product of the permutation matrices.
    pub fn tensor(&self, other: &Permutation) -> Permutation {
        let m = other.degree();
        let mut images = Vec::with_capacity(self.degree() * m);
        for i in 0..self.degree() {
            for j in 0..m {
                images.push(self.images[i] * m + other.images[j]);
            }
        }
        Permutation { images }
    }

    pub fn direct_sum(&self, other: &Permutation) -> Permutation {
        let n = self.degree();
        let mut images = self.images.clone();
        images.extend(other.images.iter().map(|&x| x + n));
        Permutation { images }
    }

    /// `(cyc, fix)`: all cycles including fixed points, and fixed points.
    pub fn cycle_and_fix_counts(&self) -> (usize, usize) {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut cyc = 0;
        let mut fix = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            cyc += 1;
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                len += 1;
                i = self.images[i];
            }
            if len == 1 {
                fix += 1;
            }
        }
        (cyc, fix)
    }

    /// The permutation matrix `A_p` with `A_p e_i = e_{p(i)}`.
    pub fn matrix(&self, field: &Field) -> Matrix {
        let n = self.degree();
        let mut m = Matrix::zero(field.clone(), n, n);
        for i in 0..n {
            m.set(self.images[i], i, field.one());
        }
        m
    }
}

/// Exact normalized count of disagreements.
pub fn hamming_distance(p: &Permutation, q: &Permutation) -> Result<Rational> {
    if p.degree() != q.degree() {
        return Err(Error::SizeMismatch {
            left: p.degree().to_string(),
            right: q.degree().to_string(),
        });
    }
    let n = p.degree();
    if n == 0 {
        return Ok(Rational::from_integer(BigInt::from(0)));
    }
    let moved = p
        .images
        .iter()
        .zip(&q.images)
        .filter(|(a, b)| a != b)
        .count();
    Ok(Rational::new(BigInt::from(moved), BigInt::from(n)))
}

/// Per-element certificate of the embedding: the Hamming/rank sandwich
/// `(1/2) d_Hamm(id, p) <= rho(I - A_p) <= d_Hamm(id, p)`.
#[derive(Debug, Clone, Serialize)]
pub struct SoficEmbedElement {
    pub label: String,
    #[serde(with = "crate::json::rat")]
    pub hamming: Rational,
    #[serde(with = "crate::json::rat")]
    pub rank_separation: Rational,
    pub sandwich_holds: bool,
    /// Set when a non-identity label is mapped to the identity permutation.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SoficEmbedPair {
    pub left: String,
    pub right: String,
    #[serde(with = "crate::json::rat")]
    pub matrix_defect: Rational,
    #[serde(with = "crate::json::rat")]
    pub permutation_defect: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct SoficEmbedReport {
    pub per_element: Vec<SoficEmbedElement>,
    pub per_pair: Vec<SoficEmbedPair>,
    /// Pairwise `defect(matrices) <= defect(permutations)` held everywhere.
    pub defect_dominated: bool,
}

/// Converts a permutation almost-representation to a matrix one. Degenerate
/// inputs (identity permutations on non-identity labels) are flagged in the
/// report, not rejected: the certifier judges quality, the embedder does not.
pub fn embed_sofic_rep(
    table: &PartialGroupTable,
    perms: &BTreeMap<String, Permutation>,
    field: &Field,
) -> Result<(AlmostRep, SoficEmbedReport)> {
    let mut degree = None;
    for g in table.elements() {
        let p = perms
            .get(g)
            .ok_or_else(|| Error::BadRep(format!("no permutation bound to {g:?}")))?;
        match degree {
            None => degree = Some(p.degree()),
            Some(d) if d != p.degree() => {
                return Err(Error::SizeMismatch {
                    left: d.to_string(),
                    right: p.degree().to_string(),
                })
            }
            _ => {}
        }
    }
    let n = degree.unwrap_or(0);
    let id = Permutation::identity(n);
    let id_matrix = id.matrix(field);

    let mut matrices = BTreeMap::new();
    let mut per_element = Vec::new();
    for g in table.elements() {
        let p = &perms[g];
        let a = p.matrix(field);
        let hamming = hamming_distance(&id, p)?;
        let rank_separation = id_matrix.rank_distance(&a)?;
        let two = Rational::from_integer(BigInt::from(2));
        let sandwich_holds = rank_separation <= hamming && hamming <= &two * &rank_separation;
        per_element.push(SoficEmbedElement {
            label: g.clone(),
            degenerate: g != table.identity() && *p == id,
            hamming,
            rank_separation,
            sandwich_holds,
        });
        matrices.insert(g.clone(), a);
    }

    let mut per_pair = Vec::new();
    let mut defect_dominated = true;
    for ((g, h), gh) in table.products() {
        let composed = perms[g].compose(&perms[h])?;
        let permutation_defect = hamming_distance(&composed, &perms[gh])?;
        let matrix_defect = matrices[g]
            .mul(&matrices[h])?
            .rank_distance(&matrices[gh])?;
        if matrix_defect > permutation_defect {
            defect_dominated = false;
        }
        per_pair.push(SoficEmbedPair {
            left: g.clone(),
            right: h.clone(),
            matrix_defect,
            permutation_defect,
        });
    }

    let rep = AlmostRep::new(table.clone(), field.clone(), n, matrices)?;
    Ok((
        rep,
        SoficEmbedReport {
            per_element,
            per_pair,
            defect_dominated,
        },
    ))
}
