//! Rank amplification at finite level.
//!
//! The tensor-square iteration `A_1 = A`, `A_{m+1} = A_m (x) A_m` drives the
//! eigenvalue-1 mass `M_1` (and, for unipotent matrices, the block fraction
//! `J`) toward 1/2 under the contraction `f(x) = x^2 + (1-x)^2`, which is
//! what pushes separation toward the universal 1/4 threshold. Everything
//! here replaces the ultraproduct limit by one explicit level `m` and
//! reports the exact `f^{m-1}(c)` bound alongside the exact values, so
//! callers can watch the convergence.
//!
//! All constructed sizes are capped by a hard row budget; exceeding it is an
//! error, never a silent truncation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::certify::{defect_report, AlmostRep};
use crate::error::{Error, Result};
use crate::field::{rational_from_ints, Rational, Value};
use crate::jordan::{algebraic_multiplicity, unipotent_block_fraction};
use crate::matrix::Matrix;

/// `f(x) = x^2 + (1-x)^2` iterated `m` times; increasing on `[1/2, 1]` with
/// fixed points 1/2 and 1.
pub fn f_iterate(x: &Rational, m: usize) -> Result<Rational> {
    let half = rational_from_ints(1, 2);
    let one = Rational::one();
    if *x < half || *x > one {
        return Err(Error::OutOfRange(format!(
            "f is defined on [1/2, 1], got {x}"
        )));
    }
    let mut v = x.clone();
    for _ in 0..m {
        let complement = &one - &v;
        v = &v * &v + &complement * &complement;
    }
    Ok(v)
}

fn check_budget(size: usize, budget: usize) -> Result<()> {
    if size > budget {
        return Err(Error::BudgetExceeded { size, budget });
    }
    Ok(())
}

/// Default bound constant: midpoint of the admissible interval `(base, 1)`.
fn midpoint_constant(base: &Rational) -> Rational {
    (base + Rational::one()) / Rational::from_integer(BigInt::from(2))
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplificationTrace {
    pub level: usize,
    pub dims: Vec<usize>,
    /// `M_1(A_i)` per level, exact.
    #[serde(with = "crate::json::rat_vec")]
    pub m1_values: Vec<Rational>,
    /// `J(A_i)` per level when the input is unipotent.
    pub j_values: Option<Vec<String>>,
    /// The constant `c` used for the `f^{i-1}(c)` chain, when applicable.
    #[serde(with = "crate::json::rat_opt")]
    pub bound_constant: Option<Rational>,
    /// `f^{i-1}(c)` per level.
    pub f_bounds: Option<Vec<String>>,
    /// `M_1(A_i) < f^{i-1}(c)` at every level (case `1/2 < M_1(A) < 1`).
    pub m1_chain_holds: Option<bool>,
    /// `J(A_i) < f^{i-1}(c)` at every level (unipotent case).
    pub j_chain_holds: Option<bool>,
}

/// Materializes `A_1, ..., A_m` by repeated tensor squaring, recording the
/// exact `M_1` mass (and `J` in the unipotent case) and checking the
/// `f^{i-1}(c)` bound chain where the theory applies.
pub fn tensor_square_iterate(
    a: &Matrix,
    m: usize,
    budget: usize,
    bound_constant: Option<&Rational>,
) -> Result<AmplificationTrace> {
    if m == 0 {
        return Err(Error::OutOfRange("level must be >= 1".into()));
    }
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_invertible() {
        return Err(Error::Singular);
    }
    let f = a.field();
    let one = f.one();
    let m1_input = algebraic_multiplicity(a, &one)?;
    let unipotent = m1_input == Rational::one();

    let mut dims = Vec::new();
    let mut m1_values = Vec::new();
    let mut j_values = if unipotent { Some(Vec::new()) } else { None };
    let mut current = a.clone();
    for level in 1..=m {
        check_budget(current.rows(), budget)?;
        dims.push(current.rows());
        m1_values.push(algebraic_multiplicity(&current, &one)?);
        if let Some(j) = j_values.as_mut() {
            j.push(unipotent_block_fraction(&current)?);
        }
        if level < m {
            current = current.tensor(&current)?;
        }
    }

    let half = rational_from_ints(1, 2);
    let one_r = Rational::one();

    // chain base: M_1 in the mixed case, J in the unipotent case
    let chain_values: Option<&Vec<Rational>> = if unipotent {
        j_values.as_ref()
    } else if m1_input > half && m1_input < one_r {
        Some(&m1_values)
    } else {
        None
    };

    let mut bound_c = None;
    let mut f_bounds = None;
    let mut m1_chain_holds = None;
    let mut j_chain_holds = None;
    if let Some(values) = chain_values {
        let base = values[0].clone();
        if base < one_r {
            // Prop-style chains need c in (base, 1) with c > 1/2
            let floor = if base > half {
                base.clone()
            } else {
                half.clone()
            };
            let c = match bound_constant {
                Some(c) if *c > floor && *c < one_r => c.clone(),
                _ => midpoint_constant(&floor),
            };
            let bounds: Vec<Rational> = (0..m).map(|i| f_iterate(&c, i)).collect::<Result<_>>()?;
            let holds =
                values
                    .iter()
                    .zip(&bounds)
                    .all(|(v, b)| if base > half { v < b } else { v <= &half });
            if unipotent {
                j_chain_holds = Some(holds);
            } else {
                m1_chain_holds = Some(holds);
            }
            f_bounds = Some(bounds.iter().map(|b| b.to_string()).collect());
            bound_c = Some(c);
        }
    }

    Ok(AmplificationTrace {
        level: m,
        dims,
        m1_values,
        j_values: j_values.map(|v| v.iter().map(|j| j.to_string()).collect()),
        bound_constant: bound_c,
        f_bounds,
        m1_chain_holds,
        j_chain_holds,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoostElement {
    pub label: String,
    /// `rho(I - phi'(g))`, exact.
    #[serde(with = "crate::json::rat")]
    pub exact_separation: Rational,
    #[serde(with = "crate::json::rat")]
    pub m1: Rational,
    /// `(1/2) min(1 - M_1((phi(g))_m), 1 - M_1(phi(g)))`.
    #[serde(with = "crate::json::rat")]
    pub min_bound: Rational,
    pub min_bound_holds: bool,
    /// `(1/2)(1 - f^{m-1}(c))` with the certified constant, when one exists.
    #[serde(with = "crate::json::rat_opt")]
    pub chain_bound: Option<Rational>,
    #[serde(with = "crate::json::rat_opt")]
    pub bound_constant: Option<Rational>,
    pub chain_bound_holds: Option<bool>,
    /// `phi(g) = I` for a non-identity label: separation 0, nothing to boost.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoostReport {
    pub level: usize,
    pub input_dim: usize,
    pub output_dim: usize,
    pub per_element: Vec<BoostElement>,
    #[serde(with = "crate::json::rat")]
    pub defect_before: Rational,
    #[serde(with = "crate::json::rat")]
    pub defect_after: Rational,
    /// `(2^{m-1} + 1)/2 * defect_before`, from tensor/direct-sum
    /// subadditivity of the rank.
    #[serde(with = "crate::json::rat")]
    pub defect_bound: Rational,
    pub defect_bound_holds: bool,
}

/// Separation booster: `phi'(g) = (phi(g))_m (+) (phi(g) (x) Id)`, with the
/// identity factor sized so both blocks have dimension `n^{2^{m-1}}`. The
/// direct sum averages the two separations, so whichever leg the theory
/// favors contributes at least half of its bound.
pub fn boost_separation(
    rep: &AlmostRep,
    m: usize,
    budget: usize,
    bound_constant: Option<&Rational>,
) -> Result<(AlmostRep, BoostReport)> {
    if m == 0 {
        return Err(Error::OutOfRange("level must be >= 1".into()));
    }
    let n = rep.dim();
    let field = rep.field().clone();
    let one = field.one();
    // block size n^{2^{m-1}}; the tensor factor is Id of size n^{2^{m-1}-1}
    let exponent = 1usize << (m - 1);
    let mut block = 1usize;
    for _ in 0..exponent {
        block = block.checked_mul(n).ok_or(Error::BudgetExceeded {
            size: usize::MAX,
            budget,
        })?;
        check_budget(2 * block, budget)?;
    }
    let output_dim = 2 * block;
    check_budget(output_dim, budget)?;
    let id_factor_dim = block.checked_div(n).unwrap_or(0);

    let before = defect_report(rep)?;
    let half = rational_from_ints(1, 2);
    let one_r = Rational::one();

    let mut matrices = BTreeMap::new();
    let mut per_element = Vec::new();
    for g in rep.table().elements() {
        let phi = rep.matrix(g);
        // (phi)_m by repeated tensor squaring
        let mut iterated = phi.clone();
        for _ in 1..m {
            iterated = iterated.tensor(&iterated)?;
        }
        let id_factor = Matrix::identity(field.clone(), id_factor_dim);
        let amplified = phi.tensor(&id_factor)?;
        let boosted = iterated.direct_sum(&amplified)?;
        debug_assert_eq!(boosted.rows(), output_dim);

        if g != rep.table().identity() {
            let big_identity = Matrix::identity(field.clone(), output_dim);
            let exact_separation = big_identity.rank_distance(&boosted)?;
            let m1 = algebraic_multiplicity(phi, &one)?;
            let m1_iter = algebraic_multiplicity(&iterated, &one)?;
            let degenerate = phi.is_identity();

            let gap_iter = &one_r - &m1_iter;
            let gap_base = &one_r - &m1;
            let min_gap = if gap_iter < gap_base {
                gap_iter
            } else {
                gap_base
            };
            let min_bound = &half * &min_gap;
            let min_bound_holds = exact_separation >= min_bound;

            let (chain_bound, bound_c, chain_bound_holds) = if degenerate {
                (None, None, None)
            } else if m1 < one_r {
                // any c in (max(M_1, 1/2), 1) certifies (1/2)(1 - f^{m-1}(c))
                let floor = if m1 > half { m1.clone() } else { half.clone() };
                let c = match bound_constant {
                    Some(c) if *c > floor && *c < one_r => c.clone(),
                    _ => midpoint_constant(&floor),
                };
                let bound = &half * &(&one_r - &f_iterate(&c, m - 1)?);
                let holds = exact_separation >= bound;
                (Some(bound), Some(c), Some(holds))
            } else {
                // unipotent leg: chain through J instead of M_1
                let j = unipotent_block_fraction(phi)?;
                if j < one_r {
                    let floor = if j > half { j } else { half.clone() };
                    let c = match bound_constant {
                        Some(c) if *c > floor && *c < one_r => c.clone(),
                        _ => midpoint_constant(&floor),
                    };
                    let bound = &half * &(&one_r - &f_iterate(&c, m - 1)?);
                    let holds = exact_separation >= bound;
                    (Some(bound), Some(c), Some(holds))
                } else {
                    (None, None, None)
                }
            };

            per_element.push(BoostElement {
                label: g.clone(),
                exact_separation,
                m1,
                min_bound,
                min_bound_holds,
                chain_bound,
                bound_constant: bound_c,
                chain_bound_holds,
                degenerate,
            });
        }
        matrices.insert(g.clone(), boosted);
    }

    let boosted_rep = AlmostRep::new(rep.table().clone(), field, output_dim, matrices)?;
    let after = defect_report(&boosted_rep)?;
    // one tensor squaring at most doubles a defect; the Id-amplified leg
    // keeps it; the direct sum averages the two
    let doubling = Rational::from_integer(BigInt::from(1u64 << (m - 1)));
    let defect_bound = &half * &((&doubling + &one_r) * &before.max_defect);
    let defect_bound_holds = after.max_defect <= defect_bound;

    let report = BoostReport {
        level: m,
        input_dim: n,
        output_dim,
        per_element,
        defect_before: before.max_defect,
        defect_after: after.max_defect,
        defect_bound,
        defect_bound_holds,
    };
    Ok((boosted_rep, report))
}

#[derive(Debug, Clone, Serialize)]
pub struct CombineLevel {
    pub dim: usize,
    pub weight: usize,
    #[serde(with = "crate::json::rat")]
    pub rho: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct CombineReport {
    pub levels: Vec<CombineLevel>,
    pub trailing_identity_dim: usize,
    #[serde(with = "crate::json::rat")]
    pub trailing_rho: Rational,
    pub total_dim: usize,
    /// `sum_i 2^{-i} rho(Theta^i) + 2^{-k} rho(eps Id)`.
    #[serde(with = "crate::json::rat")]
    pub expected_rho: Rational,
    /// `rho` of the assembled block matrix, computed by elimination.
    #[serde(with = "crate::json::rat")]
    pub actual_rho: Rational,
    pub identity_holds: bool,
}

/// Weighted combiner: block `i` is `Theta^i (x) Id_{w_i}` sized to occupy
/// the fraction `2^{-i}` of the total dimension, plus a trailing
/// `eps * Id` block of fraction `2^{-k}` carrying the trivial-representation
/// value (the augmentation, for group algebras). The report verifies the
/// exact identity `rho = sum 2^{-i} rho(Theta^i) + 2^{-k} rho(eps Id)`.
pub fn weighted_combine(
    mats: &[Matrix],
    eps_scalar: &Value,
    budget: usize,
) -> Result<(Matrix, CombineReport)> {
    let k = mats.len();
    if k == 0 {
        return Err(Error::OutOfRange("need at least one level".into()));
    }
    if k >= 63 {
        return Err(Error::BudgetExceeded {
            size: usize::MAX,
            budget,
        });
    }
    let field = mats[0].field().clone();
    for m in mats {
        if m.field() != &field {
            return Err(Error::FieldMismatch);
        }
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() == 0 {
            return Err(Error::OutOfRange(
                "levels must have positive dimension".into(),
            ));
        }
    }

    // smallest D with 2^i * n_i | D for each level and 2^k | D
    let mut d: u128 = 1u128 << k;
    for (i, m) in mats.iter().enumerate() {
        let need = (m.rows() as u128) << (i + 1);
        d = d.lcm(&need);
        if d > budget as u128 {
            return Err(Error::BudgetExceeded {
                size: d.min(usize::MAX as u128) as usize,
                budget,
            });
        }
    }
    let total = d as usize;

    let mut levels = Vec::new();
    let mut combined: Option<Matrix> = None;
    let mut expected = Rational::zero();
    for (i, m) in mats.iter().enumerate() {
        let weight = total / ((m.rows()) << (i + 1));
        let block = m.tensor(&Matrix::identity(field.clone(), weight))?;
        let rho = m.normalized_rank();
        expected += &rho / Rational::from_integer(BigInt::from(1u128 << (i + 1)));
        levels.push(CombineLevel {
            dim: m.rows(),
            weight,
            rho,
        });
        combined = Some(match combined {
            None => block,
            Some(acc) => acc.direct_sum(&block)?,
        });
    }
    let trailing_dim = total >> k;
    let trailing = Matrix::scalar(field.clone(), trailing_dim, eps_scalar);
    let trailing_rho = trailing.normalized_rank();
    expected += &trailing_rho / Rational::from_integer(BigInt::from(1u128 << k));
    let combined = combined.unwrap().direct_sum(&trailing)?;
    debug_assert_eq!(combined.rows(), total);

    let actual = combined.normalized_rank();
    let report = CombineReport {
        levels,
        trailing_identity_dim: trailing_dim,
        trailing_rho,
        total_dim: total,
        identity_holds: expected == actual,
        expected_rho: expected,
        actual_rho: actual,
    };
    Ok((combined, report))
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    /// `rho(U_1 - U_i)` for `i = 2..r`.
    #[serde(with = "crate::json::rat_vec")]
    pub factor_distances: Vec<Rational>,
    /// Product of the factor distances (tensor rank law).
    #[serde(with = "crate::json::rat")]
    pub expected_rho: Rational,
    #[serde(with = "crate::json::rat")]
    pub actual_rho: Rational,
    pub product_law_holds: bool,
    /// Nonzero witness: the combination cannot vanish in the combiner.
    pub separates: bool,
    /// Some inputs coincide, so the witness is vacuously zero.
    pub degenerate: bool,
}

/// Injectivity witness: `W = a_1 U_1 (x) (U_1 - U_2) (x) ... (x) (U_1 - U_r)`
/// with `rho(W) = prod rho(U_1 - U_i) > 0` exactly when the `U_i` are
/// pairwise distinct invertibles.
pub fn tensor_elimination_witness(
    coeffs: &[Value],
    mats: &[Matrix],
    budget: usize,
) -> Result<(Matrix, WitnessReport)> {
    let r = mats.len();
    if r < 2 {
        return Err(Error::OutOfRange("need at least two matrices".into()));
    }
    if coeffs.len() != r {
        return Err(Error::SizeMismatch {
            left: format!("{r} matrices"),
            right: format!("{} coefficients", coeffs.len()),
        });
    }
    let field = mats[0].field().clone();
    let n = mats[0].rows();
    for m in mats {
        if m.field() != &field {
            return Err(Error::FieldMismatch);
        }
        if m.rows() != n || m.cols() != n {
            return Err(Error::SizeMismatch {
                left: format!("{n}x{n}"),
                right: format!("{}x{}", m.rows(), m.cols()),
            });
        }
        if !m.is_invertible() {
            return Err(Error::Singular);
        }
    }
    for c in coeffs {
        if field.is_zero(c) {
            return Err(Error::OutOfRange("coefficients must be nonzero".into()));
        }
    }
    let mut size = n;
    for _ in 1..r {
        size = size.checked_mul(n).ok_or(Error::BudgetExceeded {
            size: usize::MAX,
            budget,
        })?;
        check_budget(size, budget)?;
    }

    let degenerate = (0..r).any(|i| (i + 1..r).any(|j| mats[i] == mats[j]));

    let mut w = mats[0].scale(&coeffs[0]);
    let mut factor_distances = Vec::new();
    let mut expected = Rational::one();
    for m in &mats[1..] {
        let difference = mats[0].sub(m)?;
        let rho = difference.normalized_rank();
        expected *= &rho;
        factor_distances.push(rho);
        w = w.tensor(&difference)?;
    }
    let actual = w.normalized_rank();
    let report = WitnessReport {
        factor_distances,
        product_law_holds: expected == actual,
        separates: actual > Rational::zero(),
        expected_rho: expected,
        actual_rho: actual,
        degenerate,
    };
    Ok((w, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::cyclic_group_table;
    use crate::field::Field;
    use crate::DEFAULT_BUDGET;

    fn q() -> Field {
        Field::Rationals
    }

    #[test]
    fn f_map_examples() {
        let half = rational_from_ints(1, 2);
        assert_eq!(f_iterate(&half, 1).unwrap(), half);
        assert_eq!(f_iterate(&Rational::one(), 5).unwrap(), Rational::one());
        assert_eq!(
            f_iterate(&rational_from_ints(3, 4), 1).unwrap(),
            rational_from_ints(5, 8)
        );
        assert!(f_iterate(&rational_from_ints(1, 4), 1).is_err());
        assert!(f_iterate(&rational_from_ints(5, 4), 1).is_err());
    }

    #[test]
    fn f_map_contracts_toward_half() {
        let mut x = rational_from_ints(99, 100);
        for _ in 0..8 {
            let next = f_iterate(&x, 1).unwrap();
            assert!(next <= x);
            x = next;
        }
        assert!(x > rational_from_ints(1, 2));
    }

    #[test]
    fn tensor_square_tight_case() {
        // diag(1,1,-1): M_1(A_2) = 5/9 = f(2/3), the tight instance
        let f = q();
        let a = Matrix::diagonal(f.clone(), &[f.from_i64(1), f.from_i64(1), f.from_i64(-1)]);
        let trace = tensor_square_iterate(&a, 2, DEFAULT_BUDGET, None).unwrap();
        assert_eq!(trace.dims, vec![3, 9]);
        assert_eq!(trace.m1_values[0], rational_from_ints(2, 3));
        assert_eq!(trace.m1_values[1], rational_from_ints(5, 9));
        assert_eq!(
            trace.m1_values[1],
            f_iterate(&rational_from_ints(2, 3), 1).unwrap()
        );
        assert_eq!(trace.m1_chain_holds, Some(true));

        let identity = Matrix::identity(f.clone(), 2);
        let trace = tensor_square_iterate(&identity, 3, DEFAULT_BUDGET, None).unwrap();
        assert!(trace.m1_values.iter().all(|v| *v == Rational::one()));
        assert_eq!(trace.m1_chain_holds, None);
        assert_eq!(trace.j_chain_holds, None);
    }

    #[test]
    fn tensor_square_unipotent_case() {
        // J(1,2) + J(1,1): J = 2/3, J(A_2) = 5/9 <= min(J, J^2 + (1-J)^2)
        let f = q();
        let one = f.one();
        let a = Matrix::jordan_block(f.clone(), &one, 2)
            .direct_sum(&Matrix::jordan_block(f.clone(), &one, 1))
            .unwrap();
        let trace = tensor_square_iterate(&a, 2, DEFAULT_BUDGET, None).unwrap();
        let j = trace.j_values.as_ref().unwrap();
        assert_eq!(j[0], "2/3");
        assert_eq!(j[1], "5/9");
        assert_eq!(trace.j_chain_holds, Some(true));
    }

    #[test]
    fn tensor_square_rejects_bad_inputs() {
        let f = q();
        let singular = Matrix::zero(f.clone(), 2, 2);
        assert!(matches!(
            tensor_square_iterate(&singular, 2, DEFAULT_BUDGET, None),
            Err(Error::Singular)
        ));
        let a = Matrix::identity(f.clone(), 3);
        assert!(matches!(
            tensor_square_iterate(&a, 3, 10, None),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn boost_unipotent_reaches_quarter() {
        // phi(1) = [[1,1],[0,1]] on a Z fragment: at m = 2 the boosted rep
        // has size 8 and separation 1/2 >= 1/4
        let f = q();
        let table = crate::certify::integer_fragment_table(1);
        let matrices: BTreeMap<String, Matrix> = [
            ("e".to_string(), Matrix::identity(f.clone(), 2)),
            (
                "1".to_string(),
                Matrix::from_i64_rows(f.clone(), &[&[1, 1], &[0, 1]]),
            ),
            (
                "-1".to_string(),
                Matrix::from_i64_rows(f.clone(), &[&[1, -1], &[0, 1]]),
            ),
        ]
        .into_iter()
        .collect();
        let rep = AlmostRep::new(table, f, 2, matrices).unwrap();
        let (boosted, report) = boost_separation(&rep, 2, DEFAULT_BUDGET, None).unwrap();
        assert_eq!(boosted.dim(), 8);
        assert_eq!(report.output_dim, 8);
        let one_row = report.per_element.iter().find(|e| e.label == "1").unwrap();
        assert_eq!(one_row.exact_separation, rational_from_ints(1, 2));
        assert!(one_row.exact_separation >= rational_from_ints(1, 4));
        assert!(one_row.min_bound_holds);
        assert_eq!(one_row.chain_bound_holds, Some(true));
        assert!(report.defect_after.is_zero());
    }

    #[test]
    fn boost_flags_degenerate_identity() {
        let f = q();
        let table = cyclic_group_table(2);
        let matrices: BTreeMap<String, Matrix> = [
            ("e".to_string(), Matrix::identity(f.clone(), 2)),
            ("g".to_string(), Matrix::identity(f.clone(), 2)),
        ]
        .into_iter()
        .collect();
        let rep = AlmostRep::new(table, f, 2, matrices).unwrap();
        let (_, report) = boost_separation(&rep, 2, DEFAULT_BUDGET, None).unwrap();
        let row = &report.per_element[0];
        assert!(row.degenerate);
        assert!(row.exact_separation.is_zero());
        assert_eq!(row.chain_bound, None);
    }

    #[test]
    fn boost_mixed_case_with_custom_constant() {
        // diag(1,1,-1) at m = 3 with c = 3/4: bound (1/2)(1 - f^2(3/4)) = 15/64
        let f = q();
        let table = cyclic_group_table(2);
        let matrices: BTreeMap<String, Matrix> = [
            ("e".to_string(), Matrix::identity(f.clone(), 3)),
            (
                "g".to_string(),
                Matrix::diagonal(f.clone(), &[f.from_i64(1), f.from_i64(1), f.from_i64(-1)]),
            ),
        ]
        .into_iter()
        .collect();
        let rep = AlmostRep::new(table, f, 3, matrices).unwrap();
        let c = rational_from_ints(3, 4);
        let (boosted, report) = boost_separation(&rep, 3, DEFAULT_BUDGET, Some(&c)).unwrap();
        assert_eq!(boosted.dim(), 2 * 81);
        let row = &report.per_element[0];
        assert_eq!(row.bound_constant, Some(c));
        assert_eq!(row.chain_bound, Some(rational_from_ints(15, 64)));
        assert_eq!(row.chain_bound_holds, Some(true));
        assert_eq!(row.exact_separation, rational_from_ints(67, 162));
    }

    #[test]
    fn combine_identity_examples() {
        let f = q();
        // k = 1, zero block, zero augmentation
        let z = Matrix::zero(f.clone(), 2, 2);
        let (_, report) = weighted_combine(&[z], &f.zero(), DEFAULT_BUDGET).unwrap();
        assert!(report.identity_holds);
        assert!(report.actual_rho.is_zero());

        // k = 2 sign-representation value: 3/8
        let a = Matrix::diagonal(f.clone(), &[f.from_i64(0), f.from_i64(2)]);
        let b = Matrix::diagonal(
            f.clone(),
            &[f.from_i64(0), f.from_i64(2), f.from_i64(2), f.from_i64(0)],
        );
        let (combined, report) = weighted_combine(&[a, b], &f.zero(), DEFAULT_BUDGET).unwrap();
        assert!(report.identity_holds);
        assert_eq!(report.actual_rho, rational_from_ints(3, 8));
        assert_eq!(combined.rows(), report.total_dim);

        // k = 3 all invertible: rho = 1 - 2^{-3}
        let mats = vec![
            Matrix::identity(f.clone(), 2),
            Matrix::identity(f.clone(), 4),
            Matrix::identity(f.clone(), 2),
        ];
        let (_, report) = weighted_combine(&mats, &f.zero(), DEFAULT_BUDGET).unwrap();
        assert!(report.identity_holds);
        assert_eq!(report.actual_rho, rational_from_ints(7, 8));
    }

    #[test]
    fn combine_budget_is_enforced() {
        let f = q();
        let a = Matrix::identity(f.clone(), 7);
        let b = Matrix::identity(f.clone(), 11);
        // D = lcm(4, 14, 44) = 308
        assert!(matches!(
            weighted_combine(&[a.clone(), b.clone()], &f.zero(), 100),
            Err(Error::BudgetExceeded { .. })
        ));
        let (combined, report) = weighted_combine(&[a, b], &f.one(), DEFAULT_BUDGET).unwrap();
        assert_eq!(combined.rows(), 308);
        assert!(report.identity_holds);
        assert_eq!(report.actual_rho, Rational::one());
    }

    #[test]
    fn witness_examples() {
        let f = q();
        let i2 = Matrix::identity(f.clone(), 2);
        let d = Matrix::diagonal(f.clone(), &[f.from_i64(1), f.from_i64(-1)]);
        let (_, report) =
            tensor_elimination_witness(&[f.one(), f.one()], &[i2.clone(), d], DEFAULT_BUDGET)
                .unwrap();
        assert!(report.product_law_holds);
        assert!(report.separates);
        assert!(!report.degenerate);
        assert_eq!(report.actual_rho, rational_from_ints(1, 2));

        let (_, report) = tensor_elimination_witness(
            &[f.one(), f.one()],
            &[i2.clone(), i2.clone()],
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!(report.degenerate);
        assert!(!report.separates);
        assert!(report.actual_rho.is_zero());
        assert!(report.product_law_holds);

        let f7 = Field::new(&crate::field::FieldSpec::Prime { p: 7 }).unwrap();
        let u1 = Matrix::diagonal(f7.clone(), &[f7.from_i64(1), f7.from_i64(2)]);
        let u2 = Matrix::diagonal(f7.clone(), &[f7.from_i64(2), f7.from_i64(3)]);
        let u3 = Matrix::diagonal(f7.clone(), &[f7.from_i64(4), f7.from_i64(5)]);
        let (_, report) = tensor_elimination_witness(
            &[f7.one(), f7.from_i64(2), f7.from_i64(3)],
            &[u1, u2, u3],
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!(report.separates);
        assert!(report.product_law_holds);
    }

    #[test]
    fn witness_rejects_bad_inputs() {
        let f = q();
        let i2 = Matrix::identity(f.clone(), 2);
        assert!(tensor_elimination_witness(
            std::slice::from_ref(&f.one()),
            std::slice::from_ref(&i2),
            DEFAULT_BUDGET
        )
        .is_err());
        assert!(tensor_elimination_witness(
            &[f.zero(), f.one()],
            &[i2.clone(), i2.clone()],
            DEFAULT_BUDGET
        )
        .is_err());
        let z = Matrix::zero(f.clone(), 2, 2);
        assert!(matches!(
            tensor_elimination_witness(&[f.one(), f.one()], &[i2, z], DEFAULT_BUDGET),
            Err(Error::Singular)
        ));
    }
}
