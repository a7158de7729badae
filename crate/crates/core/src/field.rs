//! Exact scalar arithmetic: the rationals, prime fields `F_p`, and number
//! fields `Q[x]/(m)` presented by a monic squarefree minimal polynomial.
//!
//! Every element is kept in canonical form so structural equality decides
//! field equality: fractions are reduced with a positive denominator,
//! prime-field residues live in `[0, p)`, and number-field elements are
//! coefficient vectors of length `deg m` reduced modulo `m`.
//!
//! Squarefreeness of `m` is validated; irreducibility is not. Rank
//! preservation of [`crate::matrix::restrict_scalars`] is guaranteed only for
//! an irreducible minimal polynomial (the bundled corpus uses `x^2+1`,
//! `x^2-2`, `x^3-2`). With a squarefree but reducible `m` the quotient has
//! zero divisors and inversion may fail with [`Error::ZeroDivisor`].
//!
//! The workbench takes `Q` and its finite extensions as the ground-truth
//! scalars; the real and complex fields are never represented.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Largest admissible prime modulus: products of two residues below `2^61`
/// fit in `u128` without overflow checks on the hot path.
pub const MAX_PRIME: u64 = 1 << 61;

/// Serializable description of a field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FieldSpec {
    #[serde(rename = "Q")]
    Rationals,
    #[serde(rename = "Fp")]
    Prime { p: u64 },
    /// Coefficients low-to-high including the leading 1.
    #[serde(rename = "NF")]
    NumberField { minpoly: Vec<i64> },
}

impl std::fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::Prime { p } => write!(f, "F_{p}"),
            FieldSpec::NumberField { minpoly } => write!(f, "Q[x]/{minpoly:?}"),
        }
    }
}

/// A validated field handle. Stateless: all operations are pure functions of
/// the handle and its arguments, safe for unrestricted concurrent use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Field {
    Rationals,
    Prime(u64),
    Extension(ExtensionField),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionField {
    minpoly: Vec<BigInt>,
    degree: usize,
}

/// A field element. The payload variant must match the owning [`Field`];
/// all constructors below guarantee canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Rat(Rational),
    Mod(u64),
    Ext(Vec<Rational>),
}

impl Field {
    /// Validates the spec and returns a field handle.
    pub fn new(spec: &FieldSpec) -> Result<Field> {
        match spec {
            FieldSpec::Rationals => Ok(Field::Rationals),
            FieldSpec::Prime { p } => {
                if *p >= MAX_PRIME {
                    return Err(Error::PrimeTooLarge(*p));
                }
                if !is_prime(*p) {
                    return Err(Error::NotPrime(*p));
                }
                Ok(Field::Prime(*p))
            }
            FieldSpec::NumberField { minpoly } => {
                let coeffs: Vec<BigInt> = minpoly.iter().map(|&c| BigInt::from(c)).collect();
                ExtensionField::new(coeffs).map(Field::Extension)
            }
        }
    }

    pub fn spec(&self) -> FieldSpec {
        match self {
            Field::Rationals => FieldSpec::Rationals,
            Field::Prime(p) => FieldSpec::Prime { p: *p },
            Field::Extension(ext) => FieldSpec::NumberField {
                minpoly: ext
                    .minpoly
                    .iter()
                    .map(|c| i64::try_from(c).expect("minpoly coefficients fit i64"))
                    .collect(),
            },
        }
    }

    pub fn zero(&self) -> Value {
        match self {
            Field::Rationals => Value::Rat(Rational::zero()),
            Field::Prime(_) => Value::Mod(0),
            Field::Extension(ext) => Value::Ext(vec![Rational::zero(); ext.degree]),
        }
    }

    pub fn one(&self) -> Value {
        match self {
            Field::Rationals => Value::Rat(Rational::one()),
            Field::Prime(_) => Value::Mod(1 % self.prime()),
            Field::Extension(ext) => {
                let mut v = vec![Rational::zero(); ext.degree];
                v[0] = Rational::one();
                Value::Ext(v)
            }
        }
    }

    pub fn from_i64(&self, n: i64) -> Value {
        match self {
            Field::Rationals => Value::Rat(Rational::from_integer(BigInt::from(n))),
            Field::Prime(p) => Value::Mod(n.rem_euclid(*p as i64) as u64),
            Field::Extension(ext) => {
                let mut v = vec![Rational::zero(); ext.degree];
                v[0] = Rational::from_integer(BigInt::from(n));
                Value::Ext(v)
            }
        }
    }

    pub fn is_zero(&self, a: &Value) -> bool {
        match a {
            Value::Rat(r) => r.is_zero(),
            Value::Mod(m) => *m == 0,
            Value::Ext(v) => v.iter().all(Rational::is_zero),
        }
    }

    pub fn add(&self, a: &Value, b: &Value) -> Value {
        match (self, a, b) {
            (Field::Rationals, Value::Rat(x), Value::Rat(y)) => Value::Rat(x + y),
            (Field::Prime(p), Value::Mod(x), Value::Mod(y)) => {
                Value::Mod(((*x as u128 + *y as u128) % *p as u128) as u64)
            }
            (Field::Extension(_), Value::Ext(x), Value::Ext(y)) => {
                Value::Ext(x.iter().zip(y).map(|(u, v)| u + v).collect())
            }
            _ => panic!("value does not belong to field {self:?}"),
        }
    }

    pub fn sub(&self, a: &Value, b: &Value) -> Value {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Value) -> Value {
        match (self, a) {
            (Field::Rationals, Value::Rat(x)) => Value::Rat(-x),
            (Field::Prime(p), Value::Mod(x)) => Value::Mod(if *x == 0 { 0 } else { p - x }),
            (Field::Extension(_), Value::Ext(x)) => Value::Ext(x.iter().map(|u| -u).collect()),
            _ => panic!("value does not belong to field {self:?}"),
        }
    }

    pub fn mul(&self, a: &Value, b: &Value) -> Value {
        match (self, a, b) {
            (Field::Rationals, Value::Rat(x), Value::Rat(y)) => Value::Rat(x * y),
            (Field::Prime(p), Value::Mod(x), Value::Mod(y)) => {
                Value::Mod(((*x as u128 * *y as u128) % *p as u128) as u64)
            }
            (Field::Extension(ext), Value::Ext(x), Value::Ext(y)) => Value::Ext(ext.mul(x, y)),
            _ => panic!("value does not belong to field {self:?}"),
        }
    }

    pub fn inv(&self, a: &Value) -> Result<Value> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        match (self, a) {
            (Field::Rationals, Value::Rat(x)) => Ok(Value::Rat(x.recip())),
            (Field::Prime(p), Value::Mod(x)) => Ok(Value::Mod(mod_inverse(*x, *p))),
            (Field::Extension(ext), Value::Ext(x)) => ext.inv(x).map(Value::Ext),
            _ => panic!("value does not belong to field {self:?}"),
        }
    }

    pub fn div(&self, a: &Value, b: &Value) -> Result<Value> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn prime(&self) -> u64 {
        match self {
            Field::Prime(p) => *p,
            _ => unreachable!(),
        }
    }

    /// Parses the canonical string form: `"a/b"` or `"a"` over the rationals,
    /// a decimal residue over a prime field. Number-field elements are
    /// coefficient arrays and go through [`Field::value_from_coeffs`].
    pub fn parse_value(&self, s: &str) -> Result<Value> {
        let bad = || Error::BadElement(s.to_string(), format!("{}", self.spec()));
        match self {
            Field::Rationals => Ok(Value::Rat(parse_rational(s).ok_or_else(bad)?)),
            Field::Prime(p) => {
                let neg = s.starts_with('-');
                let digits = s.strip_prefix('-').unwrap_or(s);
                let n: u128 = digits.parse().map_err(|_| bad())?;
                let r = (n % *p as u128) as u64;
                Ok(Value::Mod(if neg && r != 0 { p - r } else { r }))
            }
            Field::Extension(ext) => {
                // accept a bare rational as the constant coefficient
                let c = parse_rational(s).ok_or_else(bad)?;
                let mut v = vec![Rational::zero(); ext.degree];
                v[0] = c;
                Ok(Value::Ext(v))
            }
        }
    }

    /// Builds a number-field element from rational coefficient strings
    /// (low-to-high; shorter vectors are zero-padded, longer ones reduced).
    pub fn value_from_coeffs(&self, coeffs: &[String]) -> Result<Value> {
        let Field::Extension(ext) = self else {
            return Err(Error::BadElement(
                format!("{coeffs:?}"),
                format!("{}", self.spec()),
            ));
        };
        let mut parsed = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            parsed.push(
                parse_rational(c)
                    .ok_or_else(|| Error::BadElement(c.clone(), format!("{}", self.spec())))?,
            );
        }
        Ok(Value::Ext(ext.reduce(parsed)))
    }

    /// Canonical string form; number-field elements render as coefficient
    /// arrays via [`Field::value_coeff_strings`].
    pub fn format_value(&self, v: &Value) -> String {
        match v {
            Value::Rat(r) => r.to_string(),
            Value::Mod(m) => m.to_string(),
            Value::Ext(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("[{}]", parts.join(","))
            }
        }
    }

    pub fn value_coeff_strings(&self, v: &Value) -> Option<Vec<String>> {
        match v {
            Value::Ext(c) => Some(c.iter().map(|x| x.to_string()).collect()),
            _ => None,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Field::Extension(ext) => ext.degree,
            _ => 1,
        }
    }
}

impl ExtensionField {
    pub fn new(minpoly: Vec<BigInt>) -> Result<ExtensionField> {
        let degree = minpoly.len().saturating_sub(1);
        if degree < 1 || minpoly.last().map(|c| !c.is_one()).unwrap_or(true) {
            return Err(Error::BadMinimalPolynomial);
        }
        let m: Vec<Rational> = minpoly.iter().map(|c| Rational::from(c.clone())).collect();
        let dm = poly_derivative(&m);
        if poly_degree(&poly_gcd(&m, &dm)) != 0 {
            return Err(Error::NotSquarefree);
        }
        Ok(ExtensionField { minpoly, degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn minpoly_rational(&self) -> Vec<Rational> {
        self.minpoly
            .iter()
            .map(|c| Rational::from(c.clone()))
            .collect()
    }

    fn reduce(&self, poly: Vec<Rational>) -> Vec<Rational> {
        let m = self.minpoly_rational();
        let mut r = poly_rem(&poly, &m);
        r.resize(self.degree, Rational::zero());
        r
    }

    fn mul(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        self.reduce(poly_mul(a, b))
    }

    fn inv(&self, a: &[Rational]) -> Result<Vec<Rational>> {
        // extended Euclid in Q[x]: s*a + t*m = gcd
        let m = self.minpoly_rational();
        let (g, s, _) = poly_ext_gcd(&trim(a.to_vec()), &m);
        if poly_degree(&g) != 0 {
            return Err(Error::ZeroDivisor);
        }
        let ginv = g[0].recip();
        let scaled: Vec<Rational> = s.iter().map(|c| c * &ginv).collect();
        Ok(self.reduce(scaled))
    }

    /// The `e x e` rational matrix of multiplication by `a` in the basis
    /// `1, x, ..., x^{e-1}`, row-major. Column `j` holds the coefficients of
    /// `a * x^j mod m`.
    pub fn companion_block(&self, a: &[Rational]) -> Vec<Rational> {
        let e = self.degree;
        let mut block = vec![Rational::zero(); e * e];
        let mut cur = self.reduce(a.to_vec());
        for j in 0..e {
            for i in 0..e {
                block[i * e + j] = cur[i].clone();
            }
            if j + 1 < e {
                let mut shifted = vec![Rational::zero()];
                shifted.extend(cur.iter().cloned());
                cur = self.reduce(shifted);
            }
        }
        block
    }
}

/// Parses `"a"` or `"a/b"` into a reduced rational with positive denominator.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

pub fn rational_from_ints(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

// -- polynomial helpers over Q (dense, low-to-high, trailing zeros trimmed) --

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().map(Rational::is_zero).unwrap_or(false) {
        p.pop();
    }
    p
}

fn poly_degree(p: &[Rational]) -> isize {
    p.len() as isize - 1
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_rem(a: &[Rational], m: &[Rational]) -> Vec<Rational> {
    let mut r = trim(a.to_vec());
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead = m[dm].clone();
    while r.len() > dm {
        let k = r.len() - 1 - dm;
        let q = &r[r.len() - 1] / &lead;
        for i in 0..=dm {
            let t = &q * &m[i];
            r[k + i] -= t;
        }
        r = trim(r);
    }
    r
}

fn poly_derivative(p: &[Rational]) -> Vec<Rational> {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
            .collect(),
    )
}

fn poly_gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = a.to_vec();
    out.resize(out.len().max(b.len()), Rational::zero());
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(out)
}

/// Returns `(g, s, t)` with `s*a + t*b = g`.
fn poly_ext_gcd(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>, Vec<Rational>) {
    let mut r0 = trim(a.to_vec());
    let mut r1 = trim(b.to_vec());
    let mut s0 = vec![Rational::one()];
    let mut s1: Vec<Rational> = vec![];
    let mut t0: Vec<Rational> = vec![];
    let mut t1 = vec![Rational::one()];
    while !r1.is_empty() {
        let (q, r) = poly_divmod(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        let t = poly_sub(&t0, &poly_mul(&q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
        t0 = t1;
        t1 = t;
    }
    (r0, s0, t0)
}

fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut q = vec![Rational::zero(); r.len().saturating_sub(db)];
    while r.len() > db {
        let k = r.len() - 1 - db;
        let c = &r[r.len() - 1] / &lead;
        q[k] = c.clone();
        for i in 0..=db {
            let t = &c * &b[i];
            r[k + i] -= t;
        }
        r = trim(r);
    }
    (trim(q), r)
}

// -- primality --

/// Deterministic Miller-Rabin below 2^32; 40 pseudo-random rounds (seeded by
/// `n`, so the answer is reproducible) above.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < (1 << 32) {
        // {2, 3, 5, 7, 11, 13} is a deterministic witness set for n < 3.3e14
        [2u64, 3, 5, 7, 11, 13].iter().all(|&a| miller_rabin(n, a))
    } else {
        let mut state = n ^ 0x9e37_79b9_7f4a_7c15;
        (0..40).all(|_| {
            state = splitmix(state);
            let a = 2 + state % (n - 3);
            miller_rabin(n, a)
        })
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn miller_rabin(n: u64, a: u64) -> bool {
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    let mut x = mod_pow(a % n, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = ((x as u128 * x as u128) % n as u128) as u64;
        if x == n - 1 {
            return true;
        }
    }
    false
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid; p prime and a != 0 mod p
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1);
    t.rem_euclid(p as i128) as u64
}

pub fn next_prime(start: u64) -> u64 {
    let mut n = start.max(2);
    while !is_prime(n) {
        n += 1;
    }
    n
}
