//! Eigenvalue multiplicity and Jordan structure through rank sequences.
//!
//! Everything here works at a caller-supplied eigenvalue: the block sizes at
//! `lambda` are read off the sequence `r_k = rank((A - lambda I)^k)` via
//! `#{blocks of size >= k} = r_{k-1} - r_k`, which needs no characteristic
//! polynomial and behaves identically over `Q`, `F_p`, and number fields.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, Rational, Value};
use crate::matrix::Matrix;

/// Block sizes at one eigenvalue, sorted descending. The sum of the sizes is
/// the algebraic multiplicity; the count is the geometric multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JordanProfile {
    pub eigenvalue: String,
    pub blocks: Vec<usize>,
}

impl JordanProfile {
    pub fn algebraic_multiplicity(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}

fn shifted(a: &Matrix, lambda: &Value) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let scalar = Matrix::scalar(a.field().clone(), a.rows(), lambda);
    a.sub(&scalar)
}

/// `M_lambda(A) = (n - rank((A - lambda I)^n)) / n`, the normalized algebraic
/// multiplicity. Powers go by repeated squaring with early exit once the
/// rank stabilizes (the rank sequence is monotone).
pub fn algebraic_multiplicity(a: &Matrix, lambda: &Value) -> Result<Rational> {
    let n = a.rows();
    if n == 0 {
        return Ok(Rational::zero());
    }
    let mut b = shifted(a, lambda)?;
    let mut rank = b.rank();
    let mut exponent = 1usize;
    while exponent < n {
        let next = b.mul(&b)?;
        let next_rank = next.rank();
        if next_rank == rank {
            break;
        }
        b = next;
        rank = next_rank;
        exponent *= 2;
    }
    Ok(Rational::new(BigInt::from(n - rank), BigInt::from(n)))
}

/// Block sizes of `A` at `lambda`, recovered from the rank sequence with
/// early exit at stabilization.
pub fn jordan_profile_at(a: &Matrix, lambda: &Value) -> Result<JordanProfile> {
    let n = a.rows();
    let b = shifted(a, lambda)?;
    // r_k = rank(B^k), k = 0..; r_0 = n
    let mut ranks = vec![n];
    let mut power = Matrix::identity(a.field().clone(), n);
    while *ranks.last().unwrap() > 0 {
        power = power.mul(&b)?;
        let r = power.rank();
        if r == *ranks.last().unwrap() {
            break;
        }
        ranks.push(r);
        if ranks.len() > n {
            break;
        }
    }
    // #{blocks of size >= k} = r_{k-1} - r_k (0 once stabilized)
    let at_least = |k: usize| -> usize {
        if k < ranks.len() {
            ranks[k - 1] - ranks[k]
        } else {
            0
        }
    };
    let mut blocks = Vec::new();
    for k in (1..=ranks.len().saturating_sub(1)).rev() {
        let exactly_k = at_least(k) - at_least(k + 1);
        for _ in 0..exactly_k {
            blocks.push(k);
        }
    }
    blocks.sort_unstable_by(|x, y| y.cmp(x));
    Ok(JordanProfile {
        eigenvalue: a.field().format_value(lambda),
        blocks,
    })
}

/// Normalized block count `J(A) = #blocks/n` at eigenvalue 1, defined for
/// unipotent matrices, where `rho(A - I) = 1 - J(A)`.
pub fn unipotent_block_fraction(a: &Matrix) -> Result<Rational> {
    let n = a.rows();
    if n == 0 {
        return Ok(Rational::zero());
    }
    let one = a.field().one();
    let profile = jordan_profile_at(a, &one)?;
    Ok(Rational::new(
        BigInt::from(profile.block_count()),
        BigInt::from(n),
    ))
}

/// Predicted decomposition of `J(alpha,s) (x) J(beta,t)` at eigenvalue
/// `alpha*beta`: block sizes `s+t-1, s+t-3, ..., |t-s|+1` (min(s,t) entries,
/// summing to s*t).
pub fn jordan_tensor_blocks(s: usize, t: usize) -> Result<Vec<usize>> {
    if s == 0 || t == 0 {
        return Err(Error::OutOfRange("block sizes must be positive".into()));
    }
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    let blocks: Vec<usize> = (1..=s).map(|i| s + t + 1 - 2 * i).collect();
    debug_assert_eq!(blocks.iter().sum::<usize>(), s * t);
    Ok(blocks)
}

#[derive(Debug, Clone, Serialize)]
pub struct JordanTensorCheck {
    pub agrees: bool,
    pub computed: JordanProfile,
    pub predicted: Vec<usize>,
}

/// Builds `J(alpha,s) (x) J(beta,t)` explicitly, reads its profile at
/// `alpha*beta` from rank sequences, and compares with the predicted block
/// list. Zero eigenvalues are rejected; the decomposition needs units.
pub fn verify_jordan_tensor(
    field: &Field,
    alpha: &Value,
    s: usize,
    beta: &Value,
    t: usize,
) -> Result<JordanTensorCheck> {
    if field.is_zero(alpha) || field.is_zero(beta) {
        return Err(Error::OutOfRange(
            "jordan tensor decomposition needs nonzero eigenvalues".into(),
        ));
    }
    let a = Matrix::jordan_block(field.clone(), alpha, s);
    let b = Matrix::jordan_block(field.clone(), beta, t);
    let product = a.tensor(&b)?;
    let ab = field.mul(alpha, beta);
    let computed = jordan_profile_at(&product, &ab)?;
    let predicted = jordan_tensor_blocks(s, t)?;
    Ok(JordanTensorCheck {
        agrees: computed.blocks == predicted,
        computed,
        predicted,
    })
}
