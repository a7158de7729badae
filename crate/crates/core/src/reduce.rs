//! Reduction of rational almost-representations modulo a well-chosen prime,
//! with a rank-preservation certificate.
//!
//! For each element `s` the certificate tracks a full-rank minor determinant
//! of `I - phi(s)`, the determinant of `phi(s)`, and every entry denominator.
//! A prime dividing none of these reduces the representation with
//! `rk(I - phi(s))` preserved exactly, `phi(s)` still invertible, and the
//! defect not increased. Reduction modulo an excluded prime is rejected with
//! the offending exclusion named and the rank collapse reported.
//!
//! Number-field representations are first pushed down to `Q` through
//! restriction of scalars, so there is a single reduction path.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::certify::{defect_report, AlmostRep};
use crate::error::{Error, Result};
use crate::field::{next_prime, Field, Rational, Value};
use crate::matrix::{restrict_scalars, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ExclusionSource {
    /// Determinant of the chosen full-rank minor of `I - phi(s)`.
    MinorDeterminant { element: String },
    /// Determinant of `phi(s)` itself.
    Determinant { element: String },
    /// A denominator appearing in the entries of `phi(s)`.
    Denominator { element: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct Exclusion {
    pub source: ExclusionSource,
    /// The integer whose prime divisors must be avoided (numerator times
    /// denominator of the tracked rational, sign dropped).
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimeSelection {
    pub prime: u64,
    pub exclusions: Vec<Exclusion>,
}

fn exclusion_integer(v: &Rational) -> BigInt {
    (v.numer() * v.denom()).abs()
}

fn rational_of(v: &Value) -> &Rational {
    match v {
        Value::Rat(r) => r,
        _ => unreachable!("reduction inputs are rational"),
    }
}

fn collect_exclusions(rep: &AlmostRep) -> Result<Vec<Exclusion>> {
    let identity = Matrix::identity(Field::Rationals, rep.dim());
    let mut exclusions = Vec::new();
    for s in rep.table().elements() {
        let phi = rep.matrix(s);
        let difference = identity.sub(phi)?;
        let r = difference.rank();
        let (_, _, minor_det) = difference.find_full_rank_minor(r)?;
        exclusions.push(Exclusion {
            source: ExclusionSource::MinorDeterminant { element: s.clone() },
            value: exclusion_integer(rational_of(&minor_det)).to_string(),
        });
        let det = phi.determinant()?;
        exclusions.push(Exclusion {
            source: ExclusionSource::Determinant { element: s.clone() },
            value: exclusion_integer(rational_of(&det)).to_string(),
        });
        let mut denominators = BigInt::one();
        for v in phi.entries() {
            denominators *= rational_of(v).denom();
        }
        exclusions.push(Exclusion {
            source: ExclusionSource::Denominator { element: s.clone() },
            value: denominators.abs().to_string(),
        });
    }
    Ok(exclusions)
}

fn require_rational(rep: &AlmostRep) -> Result<()> {
    if rep.field() != &Field::Rationals {
        return Err(Error::BadRep(
            "reduction starts from a rational representation".into(),
        ));
    }
    Ok(())
}

/// Smallest prime `>= start` dividing none of the excluded integers. Such a
/// prime always exists: every excluded value is a nonzero integer.
pub fn select_good_prime(rep: &AlmostRep, start: u64) -> Result<PrimeSelection> {
    require_rational(rep)?;
    let exclusions = collect_exclusions(rep)?;
    let product: BigInt = exclusions
        .iter()
        .map(|e| e.value.parse::<BigInt>().unwrap())
        .product();
    debug_assert!(!product.is_zero());
    let mut p = next_prime(start.max(2));
    loop {
        if (&product % BigInt::from(p)).is_zero() {
            p = next_prime(p + 1);
        } else {
            return Ok(PrimeSelection {
                prime: p,
                exclusions,
            });
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RankRow {
    pub element: String,
    pub rank_before: usize,
    pub rank_after: Option<usize>,
    pub invertible_mod_p: Option<bool>,
    pub preserved: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionCertificate {
    pub prime: u64,
    pub exclusions: Vec<Exclusion>,
    pub rank_table: Vec<RankRow>,
    #[serde(with = "crate::json::rat")]
    pub defect_before: Rational,
    #[serde(with = "crate::json::rat_opt")]
    pub defect_after: Option<Rational>,
    pub defect_non_increasing: Option<bool>,
    pub valid: bool,
    /// Set when the certificate is invalid: the exclusion `p` divides.
    pub violated: Option<Exclusion>,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    /// Present exactly when the certificate is valid.
    pub rep: Option<AlmostRep>,
    pub certificate: ReductionCertificate,
}

fn reduce_rational(v: &Rational, p: u64) -> Option<u64> {
    let p_big = BigInt::from(p);
    let den = (v.denom() % &p_big + &p_big) % &p_big;
    if den.is_zero() {
        return None;
    }
    let num = ((v.numer() % &p_big) + &p_big) % &p_big;
    let num_u = u64::try_from(&num).unwrap();
    let den_u = u64::try_from(&den).unwrap();
    let field = Field::Prime(p);
    let inv = field.inv(&Value::Mod(den_u)).ok()?;
    match field.mul(&Value::Mod(num_u), &inv) {
        Value::Mod(r) => Some(r),
        _ => unreachable!(),
    }
}

fn reduce_matrix(m: &Matrix, target: &Field, p: u64) -> Option<Matrix> {
    let mut entries = Vec::with_capacity(m.rows() * m.cols());
    for v in m.entries() {
        entries.push(Value::Mod(reduce_rational(rational_of(v), p)?));
    }
    Matrix::new(target.clone(), m.rows(), m.cols(), entries).ok()
}

/// Entrywise reduction `a/b -> a b^{-1} mod p` with a full certificate.
/// `p` may come from [`select_good_prime`] or the caller; either way the
/// certificate validates rank preservation, invertibility, and defect
/// non-increase, and a violated exclusion turns the outcome into a rejection
/// carrying the offending source.
pub fn reduce_mod_p(rep: &AlmostRep, p: u64) -> Result<Reduction> {
    require_rational(rep)?;
    let target = Field::new(&crate::field::FieldSpec::Prime { p })?;
    let exclusions = collect_exclusions(rep)?;
    let p_big = BigInt::from(p);
    let violated = exclusions
        .iter()
        .find(|e| (e.value.parse::<BigInt>().unwrap() % &p_big).is_zero())
        .cloned();

    let before = defect_report(rep)?;
    let identity_q = Matrix::identity(Field::Rationals, rep.dim());
    let identity_p = Matrix::identity(target.clone(), rep.dim());

    let mut rank_table = Vec::new();
    let mut reduced = BTreeMap::new();
    let mut reducible = true;
    let mut all_preserved = true;
    for s in rep.table().elements() {
        let phi = rep.matrix(s);
        let rank_before = identity_q.sub(phi)?.rank();
        let reduced_phi = reduce_matrix(phi, &target, p);
        let (rank_after, invertible) = match &reduced_phi {
            Some(m) => (Some(identity_p.sub(m)?.rank()), Some(m.is_invertible())),
            None => {
                reducible = false;
                (None, None)
            }
        };
        let preserved = rank_after == Some(rank_before) && invertible == Some(true);
        all_preserved &= preserved;
        rank_table.push(RankRow {
            element: s.clone(),
            rank_before,
            rank_after,
            invertible_mod_p: invertible,
            preserved,
        });
        if let Some(m) = reduced_phi {
            reduced.insert(s.clone(), m);
        }
    }

    let (rep_out, defect_after, defect_ok) = if reducible && all_preserved {
        let candidate = AlmostRep::new(rep.table().clone(), target, rep.dim(), reduced)?;
        let after = defect_report(&candidate)?;
        let ok = after.max_defect <= before.max_defect;
        (Some(candidate), Some(after.max_defect), Some(ok))
    } else if reducible {
        // every matrix reduced but some rank collapsed: report the defect of
        // the reduced family anyway (matrices may be singular, so bypass the
        // invariant-checking constructor)
        let mut worst = Rational::zero();
        for ((g, h), gh) in rep.table().products() {
            let eg = &reduced[g];
            let eh = &reduced[h];
            let d = eg.mul(eh)?.rank_distance(&reduced[gh])?;
            if d > worst {
                worst = d;
            }
        }
        let ok = worst <= before.max_defect;
        (None, Some(worst), Some(ok))
    } else {
        (None, None, None)
    };

    let valid = violated.is_none() && rep_out.is_some() && defect_ok.unwrap_or(false);
    Ok(Reduction {
        rep: if valid { rep_out } else { None },
        certificate: ReductionCertificate {
            prime: p,
            exclusions,
            rank_table,
            defect_before: before.max_defect,
            defect_after,
            defect_non_increasing: defect_ok,
            valid,
            violated,
        },
    })
}

/// Pushes a number-field representation down to the rationals entrywise via
/// restriction of scalars (dimension multiplies by the field degree).
pub fn restrict_rep_to_rationals(rep: &AlmostRep) -> Result<AlmostRep> {
    let Field::Extension(ext) = rep.field() else {
        return Err(Error::BadRep(
            "restriction applies to number-field representations".into(),
        ));
    };
    let degree = ext.degree();
    let mut matrices = BTreeMap::new();
    for (g, m) in rep.matrices() {
        matrices.insert(g.clone(), restrict_scalars(m)?);
    }
    AlmostRep::new(
        rep.table().clone(),
        Field::Rationals,
        rep.dim() * degree,
        matrices,
    )
}
