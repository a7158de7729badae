//! Dense exact matrices with the rank metric.
//!
//! Rank over the rationals runs fraction-free (Bareiss) elimination on a
//! denominator-cleared integer copy, so intermediate entries stay minors of
//! the input instead of exploding as free-form fractions. Prime fields use
//! plain Gaussian elimination on `u64` residues; number fields use generic
//! field-arithmetic elimination.
//!
//! Pivot rule, everywhere: the next pivot is the first nonzero entry found
//! scanning remaining rows top-down and, within a row, unused columns
//! left-to-right. This makes every elimination-derived artifact (rank
//! profiles, [`Matrix::find_full_rank_minor`], kernels) reproducible.
//!
//! Matrices are immutable values; every operation is a pure function.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::{Field, Rational, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    entries: Vec<Value>,
}

/// Pivot positions of an elimination: original row indices and column
/// indices in the order the pivots were chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotProfile {
    pub rank: usize,
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
}

impl Matrix {
    pub fn new(field: Field, rows: usize, cols: usize, entries: Vec<Value>) -> Result<Matrix> {
        let expected = rows.checked_mul(cols).ok_or_else(|| Error::SizeMismatch {
            left: format!("{rows}x{cols}"),
            right: "dimension overflow".into(),
        })?;
        if entries.len() != expected {
            return Err(Error::SizeMismatch {
                left: format!("{rows}x{cols}"),
                right: format!("{} entries", entries.len()),
            });
        }
        Ok(Matrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn zero(field: Field, rows: usize, cols: usize) -> Matrix {
        let z = field.zero();
        Matrix {
            entries: vec![z; rows * cols],
            field,
            rows,
            cols,
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            let one = m.field.one();
            m.set(i, i, one);
        }
        m
    }

    pub fn scalar(field: Field, n: usize, v: &Value) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, v.clone());
        }
        m
    }

    pub fn diagonal(field: Field, values: &[Value]) -> Matrix {
        let n = values.len();
        let mut m = Matrix::zero(field, n, n);
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    /// Jordan block `J(alpha, s)`: `alpha` on the diagonal, 1 directly above.
    pub fn jordan_block(field: Field, alpha: &Value, s: usize) -> Matrix {
        let mut m = Matrix::zero(field, s, s);
        for i in 0..s {
            m.set(i, i, alpha.clone());
            if i + 1 < s {
                let one = m.field.one();
                m.set(i, i + 1, one);
            }
        }
        m
    }

    /// Test/corpus convenience: entries from integer rows.
    pub fn from_i64_rows(field: Field, rows: &[&[i64]]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            for &v in *row {
                entries.push(field.from_i64(v));
            }
        }
        Matrix {
            field,
            rows: r,
            cols: c,
            entries,
        }
    }

    pub fn from_columns(field: Field, n: usize, columns: &[Vec<Value>]) -> Matrix {
        let mut m = Matrix::zero(field, n, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Value {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Value) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Value] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Matrix::identity(self.field.clone(), self.rows)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| self.field.is_zero(v))
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::SizeMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| self.field.add(a, b))
            .collect();
        Ok(Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| self.field.sub(a, b))
            .collect();
        Ok(Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn neg(&self) -> Matrix {
        let entries = self.entries.iter().map(|a| self.field.neg(a)).collect();
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn scale(&self, s: &Value) -> Matrix {
        let entries = self.entries.iter().map(|a| self.field.mul(a, s)).collect();
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::SizeMismatch {
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        if self.field == Field::Rationals {
            return Ok(self.mul_rational(other));
        }
        let f = &self.field;
        let mut out = Matrix::zero(f.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.at(i, l);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(l, j);
                    if f.is_zero(b) {
                        continue;
                    }
                    let t = f.mul(a, b);
                    let acc = f.add(out.at(i, j), &t);
                    out.set(i, j, acc);
                }
            }
        }
        Ok(out)
    }

    /// Rational product through integer arithmetic: clear denominators per
    /// row of `self` and per column of `other`, multiply integers (one gcd
    /// reduction per output entry instead of one per scalar operation).
    fn mul_rational(&self, other: &Matrix) -> Matrix {
        fn rat(v: &Value) -> &BigRational {
            match v {
                Value::Rat(r) => r,
                _ => unreachable!(),
            }
        }
        let mut row_scale = Vec::with_capacity(self.rows);
        let mut left = Vec::with_capacity(self.entries.len());
        for i in 0..self.rows {
            let mut l = BigInt::one();
            for j in 0..self.cols {
                l = l.lcm(rat(self.at(i, j)).denom());
            }
            for j in 0..self.cols {
                let x = rat(self.at(i, j));
                left.push(x.numer() * (&l / x.denom()));
            }
            row_scale.push(l);
        }
        let mut col_scale = Vec::with_capacity(other.cols);
        let mut right = vec![BigInt::zero(); other.entries.len()];
        for j in 0..other.cols {
            let mut l = BigInt::one();
            for i in 0..other.rows {
                l = l.lcm(rat(other.at(i, j)).denom());
            }
            for i in 0..other.rows {
                let x = rat(other.at(i, j));
                right[i * other.cols + j] = x.numer() * (&l / x.denom());
            }
            col_scale.push(l);
        }
        let mut out = Matrix::zero(Field::Rationals, self.rows, other.cols);
        let mut acc = vec![BigInt::zero(); other.cols];
        for i in 0..self.rows {
            for a in acc.iter_mut() {
                *a = BigInt::zero();
            }
            for l in 0..self.cols {
                let x = &left[i * self.cols + l];
                if x.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let y = &right[l * other.cols + j];
                    if y.is_zero() {
                        continue;
                    }
                    acc[j] += x * y;
                }
            }
            for j in 0..other.cols {
                let denom = &row_scale[i] * &col_scale[j];
                out.set(i, j, Value::Rat(BigRational::new(acc[j].clone(), denom)));
            }
        }
        out
    }

    /// Kronecker product in block order: entry `(i,j)` of `self` scales a
    /// copy of `other`.
    pub fn tensor(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let f = &self.field;
        let (p, q) = (other.rows, other.cols);
        let mut out = Matrix::zero(f.clone(), self.rows * p, self.cols * q);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.at(i, j);
                if f.is_zero(a) {
                    continue;
                }
                for r in 0..p {
                    for s in 0..q {
                        let b = other.at(r, s);
                        if f.is_zero(b) {
                            continue;
                        }
                        out.set(i * p + r, j * q + s, f.mul(a, b));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Block-diagonal sum; the empty matrix is the neutral element.
    pub fn direct_sum(&self, other: &Matrix) -> Result<Matrix> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let mut out = Matrix::zero(
            self.field.clone(),
            self.rows + other.rows,
            self.cols + other.cols,
        );
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.at(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.at(i, j).clone());
            }
        }
        Ok(out)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut out = Matrix::zero(self.field.clone(), rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.at(r, c).clone());
            }
        }
        out
    }

    /// Stacks matrices vertically (same column count and field).
    pub fn vstack(mats: &[Matrix]) -> Result<Matrix> {
        let first = mats.first().ok_or_else(|| Error::SizeMismatch {
            left: "0 matrices".into(),
            right: "vstack".into(),
        })?;
        let mut entries = Vec::new();
        let mut rows = 0;
        for m in mats {
            if m.field != first.field {
                return Err(Error::FieldMismatch);
            }
            if m.cols != first.cols {
                return Err(Error::SizeMismatch {
                    left: format!("cols {}", first.cols),
                    right: format!("cols {}", m.cols),
                });
            }
            entries.extend(m.entries.iter().cloned());
            rows += m.rows;
        }
        Matrix::new(first.field.clone(), rows, first.cols, entries)
    }

    // ---- rank machinery ----

    pub fn rank(&self) -> usize {
        self.pivot_profile().rank
    }

    /// Normalized rank of a square matrix; the empty matrix has rank 0 by
    /// convention.
    pub fn normalized_rank(&self) -> Rational {
        assert!(self.is_square(), "normalized rank needs a square matrix");
        if self.rows == 0 {
            return Rational::zero();
        }
        Rational::new(BigInt::from(self.rank()), BigInt::from(self.rows))
    }

    /// `rho(A - B)`; bi-invariant under multiplication by invertibles.
    pub fn rank_distance(&self, other: &Matrix) -> Result<Rational> {
        self.check_same_shape(other)?;
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.sub(other)?.normalized_rank())
    }

    pub fn pivot_profile(&self) -> PivotProfile {
        match &self.field {
            Field::Rationals => self.bareiss_profile(),
            Field::Prime(p) => self.gauss_profile_u64(*p),
            Field::Extension(_) => {
                self.generic_rref(false)
                    .expect("zero divisor during elimination: minimal polynomial is reducible")
                    .1
            }
        }
    }

    /// Exact column-space basis of the right null space; one vector per free
    /// column, ordered by column index.
    pub fn kernel_basis(&self) -> Vec<Vec<Value>> {
        let (rref, profile) = self
            .generic_rref(true)
            .expect("zero divisor during elimination: minimal polynomial is reducible");
        let f = &self.field;
        let pivot_of_col: std::collections::BTreeMap<usize, usize> = profile
            .pivot_cols
            .iter()
            .enumerate()
            .map(|(r, &c)| (c, r))
            .collect();
        let mut basis = Vec::new();
        for fc in 0..self.cols {
            if pivot_of_col.contains_key(&fc) {
                continue;
            }
            let mut v = vec![f.zero(); self.cols];
            v[fc] = f.one();
            for (r, &pc) in profile.pivot_cols.iter().enumerate() {
                v[pc] = f.neg(rref.at(r, fc));
            }
            basis.push(v);
        }
        basis
    }

    /// Deterministic full-rank `r x r` minor: the first `r` pivot rows and
    /// columns of the elimination, index sets sorted ascending, plus the
    /// exact determinant of that submatrix.
    pub fn find_full_rank_minor(&self, r: usize) -> Result<(Vec<usize>, Vec<usize>, Value)> {
        let profile = self.pivot_profile();
        if r > profile.rank {
            return Err(Error::MinorTooLarge {
                requested: r,
                rank: profile.rank,
            });
        }
        let mut rows: Vec<usize> = profile.pivot_rows[..r].to_vec();
        let mut cols: Vec<usize> = profile.pivot_cols[..r].to_vec();
        rows.sort_unstable();
        cols.sort_unstable();
        let det = self.submatrix(&rows, &cols).determinant()?;
        debug_assert!(!self.field.is_zero(&det));
        Ok((rows, cols, det))
    }

    pub fn determinant(&self) -> Result<Value> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        match &self.field {
            Field::Rationals => Ok(Value::Rat(self.bareiss_determinant())),
            _ => self.generic_determinant(),
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let f = &self.field;
        // Gauss-Jordan on [self | I]
        let aug = {
            let mut m = Matrix::zero(f.clone(), n, 2 * n);
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, self.at(i, j).clone());
                }
                m.set(i, n + i, f.one());
            }
            m
        };
        let (rref, profile) = aug.generic_rref_cols(true, n)?;
        if profile.rank < n {
            return Err(Error::Singular);
        }
        // rows of rref are ordered by pivot column within the left block
        let mut inv = Matrix::zero(f.clone(), n, n);
        for (r, &pc) in profile.pivot_cols.iter().enumerate() {
            for j in 0..n {
                inv.set(pc, j, rref.at(r, n + j).clone());
            }
        }
        Ok(inv)
    }

    /// Invertible completion: returns an invertible `A~` with
    /// `rank(A - A~) = n - rank(A)`. The deficiency is replaced by an
    /// identity acting from the kernel onto a complement of the image.
    pub fn invertible_completion(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let f = self.field.clone();
        let profile = self.pivot_profile();
        let r = profile.rank;
        if r == n {
            return Ok(self.clone());
        }
        // kernel basis v_1..v_{n-r}
        let kernel = self.kernel_basis();
        debug_assert_eq!(kernel.len(), n - r);
        // image basis: pivot columns of A, then greedily complete with
        // standard vectors; the added vectors u_1..u_{n-r} span a complement
        // of the image.
        let mut image_cols: Vec<Vec<Value>> = profile
            .pivot_cols
            .iter()
            .map(|&c| (0..n).map(|i| self.at(i, c).clone()).collect())
            .collect();
        let mut added: Vec<Vec<Value>> = Vec::new();
        for i in 0..n {
            if image_cols.len() == n {
                break;
            }
            let mut e = vec![f.zero(); n];
            e[i] = f.one();
            let mut test = image_cols.clone();
            test.push(e.clone());
            let cand = Matrix::from_columns(f.clone(), n, &test);
            if cand.rank() == image_cols.len() + 1 {
                image_cols.push(e.clone());
                added.push(e);
            }
        }
        debug_assert_eq!(added.len(), n - r);
        // complete the kernel to a basis of the domain
        let mut domain_cols = kernel.clone();
        for i in 0..n {
            if domain_cols.len() == n {
                break;
            }
            let mut e = vec![f.zero(); n];
            e[i] = f.one();
            let mut test = domain_cols.clone();
            test.push(e.clone());
            let cand = Matrix::from_columns(f.clone(), n, &test);
            if cand.rank() == domain_cols.len() + 1 {
                domain_cols.push(e);
            }
        }
        let t = Matrix::from_columns(f.clone(), n, &domain_cols);
        let t_inv = t.inverse()?;
        // S = first n-r rows of T^{-1}; W = U * S sends v_j to u_j and the
        // complement of the kernel to 0
        let u = Matrix::from_columns(f.clone(), n, &added);
        let s = t_inv.submatrix(&(0..n - r).collect::<Vec<_>>(), &(0..n).collect::<Vec<_>>());
        let w = u.mul(&s)?;
        let completed = self.add(&w)?;
        debug_assert!(completed.is_invertible());
        debug_assert_eq!(self.sub(&completed).unwrap().rank(), n - r);
        Ok(completed)
    }

    // ---- elimination internals ----

    /// Fraction-free elimination over the rationals. Each row is scaled to
    /// integers first (rank and pivot pattern are scaling-invariant), then
    /// one-step Bareiss keeps every intermediate entry a minor of the scaled
    /// matrix.
    fn bareiss_profile(&self) -> PivotProfile {
        let mut a = self.integer_rows().0;
        let rows = self.rows;
        let cols = self.cols;
        let mut orig: Vec<usize> = (0..rows).collect();
        let mut used = vec![false; cols];
        let mut pivot_rows = Vec::new();
        let mut pivot_cols = Vec::new();
        let mut prev = BigInt::one();
        let mut r = 0;
        while r < rows {
            let Some((pi, pc)) =
                find_pivot(rows, cols, r, &used, |i, j| !a[i * cols + j].is_zero())
            else {
                break;
            };
            a.swap_rows(rows, cols, r, pi);
            orig.swap(r, pi);
            used[pc] = true;
            pivot_rows.push(orig[r]);
            pivot_cols.push(pc);
            let p = a[r * cols + pc].clone();
            for i in r + 1..rows {
                let factor = a[i * cols + pc].clone();
                for j in 0..cols {
                    if used[j] && j != pc {
                        continue;
                    }
                    if j == pc {
                        a[i * cols + j] = BigInt::zero();
                        continue;
                    }
                    let cur = &a[i * cols + j];
                    if cur.is_zero() && factor.is_zero() {
                        continue;
                    }
                    let num = if factor.is_zero() {
                        &p * cur
                    } else {
                        &p * cur - &factor * &a[r * cols + j]
                    };
                    debug_assert!(
                        (&num % &prev).is_zero(),
                        "fraction-free division must be exact"
                    );
                    a[i * cols + j] = num / &prev; // exact by Sylvester's identity
                }
            }
            prev = p;
            r += 1;
        }
        PivotProfile {
            rank: pivot_rows.len(),
            pivot_rows,
            pivot_cols,
        }
    }

    /// Determinant over the rationals: integer Bareiss on denominator-cleared
    /// rows, undoing the scaling at the end.
    fn bareiss_determinant(&self) -> BigRational {
        let n = self.rows;
        if n == 0 {
            return Rational::one();
        }
        let (mut a, scale) = self.integer_rows();
        let cols = n;
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for r in 0..n {
            let Some(pi) = (r..n).find(|&i| !a[i * cols + r].is_zero()) else {
                return Rational::zero();
            };
            if pi != r {
                a.swap_rows(n, cols, r, pi);
                sign = -sign;
            }
            let p = a[r * cols + r].clone();
            for i in r + 1..n {
                let factor = a[i * cols + r].clone();
                for j in r + 1..cols {
                    let cur = &a[i * cols + j];
                    if cur.is_zero() && factor.is_zero() {
                        continue;
                    }
                    let num = if factor.is_zero() {
                        &p * cur
                    } else {
                        &p * cur - &factor * &a[r * cols + j]
                    };
                    debug_assert!(
                        (&num % &prev).is_zero(),
                        "fraction-free division must be exact"
                    );
                    a[i * cols + j] = num / &prev;
                }
                a[i * cols + r] = BigInt::zero();
            }
            prev = p;
        }
        let det_scaled = Rational::from_integer(prev * BigInt::from(sign));
        det_scaled / Rational::from_integer(scale)
    }

    /// Clears denominators row by row; returns the integer matrix and the
    /// product of the scaling factors.
    fn integer_rows(&self) -> (Vec<BigInt>, BigInt) {
        let mut out = Vec::with_capacity(self.entries.len());
        let mut total = BigInt::one();
        for i in 0..self.rows {
            let mut l = BigInt::one();
            for j in 0..self.cols {
                let Value::Rat(x) = self.at(i, j) else {
                    unreachable!("integer_rows is only called over the rationals")
                };
                l = l.lcm(x.denom());
            }
            for j in 0..self.cols {
                let Value::Rat(x) = self.at(i, j) else {
                    unreachable!()
                };
                out.push(x.numer() * (&l / x.denom()));
            }
            total *= l;
        }
        (out, total)
    }

    fn gauss_profile_u64(&self, p: u64) -> PivotProfile {
        let mut a: Vec<u64> = self
            .entries
            .iter()
            .map(|v| match v {
                Value::Mod(m) => *m,
                _ => unreachable!("prime-field matrix with foreign entries"),
            })
            .collect();
        let rows = self.rows;
        let cols = self.cols;
        let mut orig: Vec<usize> = (0..rows).collect();
        let mut used = vec![false; cols];
        let mut pivot_rows = Vec::new();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        while r < rows {
            let Some((pi, pc)) = find_pivot(rows, cols, r, &used, |i, j| a[i * cols + j] != 0)
            else {
                break;
            };
            a.swap_rows(rows, cols, r, pi);
            orig.swap(r, pi);
            used[pc] = true;
            pivot_rows.push(orig[r]);
            pivot_cols.push(pc);
            let pinv = mod_inv_u64(a[r * cols + pc], p);
            for i in r + 1..rows {
                let factor = a[i * cols + pc];
                if factor == 0 {
                    continue;
                }
                let scale = mulmod(factor, pinv, p);
                for j in 0..cols {
                    if used[j] {
                        continue;
                    }
                    let t = mulmod(scale, a[r * cols + j], p);
                    a[i * cols + j] = (a[i * cols + j] + p - t) % p;
                }
                a[i * cols + pc] = 0;
            }
            r += 1;
        }
        PivotProfile {
            rank: pivot_rows.len(),
            pivot_rows,
            pivot_cols,
        }
    }

    fn generic_determinant(&self) -> Result<Value> {
        let n = self.rows;
        let f = &self.field;
        if n == 0 {
            return Ok(f.one());
        }
        let mut a = self.entries.clone();
        let mut det = f.one();
        for r in 0..n {
            let Some(pi) = (r..n).find(|&i| !f.is_zero(&a[i * n + r])) else {
                return Ok(f.zero());
            };
            if pi != r {
                a.swap_rows(n, n, r, pi);
                det = f.neg(&det);
            }
            let p = a[r * n + r].clone();
            det = f.mul(&det, &p);
            let pinv = f.inv(&p)?;
            for i in r + 1..n {
                if f.is_zero(&a[i * n + r]) {
                    continue;
                }
                let scale = f.mul(&a[i * n + r], &pinv);
                for j in r + 1..n {
                    let t = f.mul(&scale, &a[r * n + j]);
                    a[i * n + j] = f.sub(&a[i * n + j], &t);
                }
                a[i * n + r] = f.zero();
            }
        }
        Ok(det)
    }

    fn generic_rref(&self, need_matrix: bool) -> Result<(Matrix, PivotProfile)> {
        self.generic_rref_cols(need_matrix, self.cols)
    }

    /// Reduced row echelon form with pivots restricted to the first
    /// `pivot_limit` columns (used for augmented systems).
    fn generic_rref_cols(
        &self,
        need_matrix: bool,
        pivot_limit: usize,
    ) -> Result<(Matrix, PivotProfile)> {
        let f = &self.field;
        let rows = self.rows;
        let cols = self.cols;
        let mut a = self.entries.clone();
        let mut orig: Vec<usize> = (0..rows).collect();
        let mut used = vec![false; cols];
        let mut pivot_rows = Vec::new();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        while r < rows {
            let Some((pi, pc)) = find_pivot(rows, pivot_limit, r, &used, |i, j| {
                !f.is_zero(&a[i * cols + j])
            }) else {
                break;
            };
            a.swap_rows(rows, cols, r, pi);
            orig.swap(r, pi);
            used[pc] = true;
            pivot_rows.push(orig[r]);
            pivot_cols.push(pc);
            let pinv = f.inv(&a[r * cols + pc])?;
            for j in 0..cols {
                if f.is_zero(&a[r * cols + j]) {
                    continue;
                }
                a[r * cols + j] = f.mul(&a[r * cols + j], &pinv);
            }
            for i in 0..rows {
                if i == r || f.is_zero(&a[i * cols + pc]) {
                    continue;
                }
                let scale = a[i * cols + pc].clone();
                for j in 0..cols {
                    if f.is_zero(&a[r * cols + j]) {
                        continue;
                    }
                    let t = f.mul(&scale, &a[r * cols + j]);
                    a[i * cols + j] = f.sub(&a[i * cols + j], &t);
                }
            }
            r += 1;
        }
        let profile = PivotProfile {
            rank: pivot_rows.len(),
            pivot_rows,
            pivot_cols,
        };
        let m = if need_matrix {
            Matrix {
                field: f.clone(),
                rows,
                cols,
                entries: a,
            }
        } else {
            Matrix::zero(f.clone(), 0, 0)
        };
        Ok((m, profile))
    }
}

/// Restriction of scalars: rewrites a square matrix over a degree-`e` number
/// field as an `en x en` rational matrix, replacing each entry by the `e x e`
/// multiplication block in the basis `1, x, ..., x^{e-1}`. Normalized rank is
/// preserved when the minimal polynomial is irreducible.
pub fn restrict_scalars(m: &Matrix) -> Result<Matrix> {
    let Field::Extension(ext) = m.field() else {
        return Err(Error::BadInput(
            "restrict_scalars needs a number-field matrix".into(),
        ));
    };
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let e = ext.degree();
    let n = m.rows();
    let mut out = Matrix::zero(Field::Rationals, e * n, e * n);
    for i in 0..n {
        for j in 0..n {
            let Value::Ext(coeffs) = m.at(i, j) else {
                unreachable!()
            };
            let block = ext.companion_block(coeffs);
            for bi in 0..e {
                for bj in 0..e {
                    out.set(
                        i * e + bi,
                        j * e + bj,
                        Value::Rat(block[bi * e + bj].clone()),
                    );
                }
            }
        }
    }
    Ok(out)
}

/// First nonzero entry scanning rows top-down, then columns left-to-right.
fn find_pivot(
    rows: usize,
    cols: usize,
    start_row: usize,
    used_cols: &[bool],
    nonzero: impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize)> {
    for i in start_row..rows {
        for (j, used) in used_cols.iter().enumerate().take(cols) {
            if !used && nonzero(i, j) {
                return Some((i, j));
            }
        }
    }
    None
}

trait SwapRows {
    fn swap_rows(&mut self, rows: usize, cols: usize, a: usize, b: usize);
}

impl<T> SwapRows for Vec<T> {
    fn swap_rows(&mut self, _rows: usize, cols: usize, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..cols {
            self.swap(a * cols + j, b * cols + j);
        }
    }
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn mod_inv_u64(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    t.rem_euclid(p as i128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{rational_from_ints, FieldSpec};

    fn q() -> Field {
        Field::Rationals
    }

    fn f101() -> Field {
        Field::new(&FieldSpec::Prime { p: 101 }).unwrap()
    }

    #[test]
    fn rank_basics() {
        assert_eq!(Matrix::identity(q(), 5).rank(), 5);
        assert_eq!(Matrix::zero(q(), 4, 6).rank(), 0);
        let m = Matrix::from_i64_rows(q(), &[&[1, 2], &[2, 4]]);
        assert_eq!(m.rank(), 1);
        assert_eq!(Matrix::from_i64_rows(f101(), &[&[1, 2], &[2, 4]]).rank(), 1);
    }

    #[test]
    fn tensor_rank_and_blocks() {
        let b = Matrix::from_i64_rows(q(), &[&[1, 2], &[3, 4]]);
        let i2 = Matrix::identity(q(), 2);
        let t = i2.tensor(&b).unwrap();
        assert_eq!(t, b.direct_sum(&b).unwrap());

        let d = Matrix::diagonal(q(), &[q().from_i64(1), q().from_i64(0)]);
        assert_eq!(d.tensor(&d).unwrap().rank(), 1);

        let one = q().one();
        let j2 = Matrix::jordan_block(q(), &one, 2);
        assert_eq!(j2.tensor(&j2).unwrap().rank(), 4);
    }

    #[test]
    fn direct_sum_rank_and_neutral() {
        let i2 = Matrix::identity(q(), 2);
        let z3 = Matrix::zero(q(), 3, 3);
        let s = i2.direct_sum(&z3).unwrap();
        assert_eq!(s.rank(), 2);
        assert_eq!(s.normalized_rank(), rational_from_ints(2, 5));

        let empty = Matrix::zero(q(), 0, 0);
        assert_eq!(i2.direct_sum(&empty).unwrap(), i2);

        let one = q().one();
        let j2 = Matrix::jordan_block(q(), &one, 2);
        let j3 = Matrix::jordan_block(q(), &one, 3);
        assert_eq!(j2.direct_sum(&j3).unwrap().rank(), 5);
    }

    #[test]
    fn rank_distance_examples() {
        let i2 = Matrix::identity(q(), 2);
        assert_eq!(i2.rank_distance(&i2).unwrap(), Rational::zero());
        let d = Matrix::diagonal(q(), &[q().from_i64(1), q().from_i64(2)]);
        assert_eq!(i2.rank_distance(&d).unwrap(), rational_from_ints(1, 2));
        let u = Matrix::from_i64_rows(q(), &[&[1, 1], &[0, 1]]);
        assert_eq!(u.rank_distance(&i2).unwrap(), rational_from_ints(1, 2));
    }

    #[test]
    fn kernel_basis_examples() {
        assert!(Matrix::identity(q(), 3).kernel_basis().is_empty());
        assert_eq!(Matrix::zero(q(), 2, 2).kernel_basis().len(), 2);
        let m = Matrix::from_i64_rows(q(), &[&[1, 2], &[2, 4]]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        // v proportional to (2, -1): 1*v0 + 2*v1 = 0
        let f = q();
        let combo = f.add(&k[0][0], &f.mul(&f.from_i64(2), &k[0][1]));
        assert!(f.is_zero(&combo));
        assert!(!f.is_zero(&k[0][0]));
    }

    #[test]
    fn full_rank_minor_examples() {
        let d = Matrix::diagonal(q(), &[q().from_i64(1), q().from_i64(0)]);
        let (r, c, det) = d.find_full_rank_minor(1).unwrap();
        assert_eq!((r, c), (vec![0], vec![0]));
        assert_eq!(det, q().one());

        let i3 = Matrix::identity(q(), 3);
        let (r, c, det) = i3.find_full_rank_minor(3).unwrap();
        assert_eq!((r, c), (vec![0, 1, 2], vec![0, 1, 2]));
        assert_eq!(det, q().one());

        let m = Matrix::from_i64_rows(q(), &[&[2, 4], &[1, 2]]);
        let (r, c, det) = m.find_full_rank_minor(1).unwrap();
        assert_eq!((r, c), (vec![0], vec![0]));
        assert_eq!(det, q().from_i64(2));
        assert!(matches!(
            m.find_full_rank_minor(2),
            Err(Error::MinorTooLarge { .. })
        ));
    }

    #[test]
    fn invertible_completion_examples() {
        let d = Matrix::diagonal(q(), &[q().from_i64(1), q().from_i64(0)]);
        let c = d.invertible_completion().unwrap();
        assert_eq!(c, Matrix::identity(q(), 2));
        assert_eq!(
            d.sub(&c).unwrap().normalized_rank(),
            rational_from_ints(1, 2)
        );

        let a = Matrix::from_i64_rows(q(), &[&[2, 1], &[1, 1]]);
        assert_eq!(a.invertible_completion().unwrap(), a);

        let z = Matrix::zero(q(), 3, 3);
        let c = z.invertible_completion().unwrap();
        assert!(c.is_invertible());
        assert_eq!(z.sub(&c).unwrap().rank(), 3);
    }

    #[test]
    fn determinant_and_inverse() {
        let m = Matrix::from_i64_rows(q(), &[&[2, 1], &[1, 1]]);
        assert_eq!(m.determinant().unwrap(), q().from_i64(1));
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).unwrap().is_identity());

        let half = Value::Rat(rational_from_ints(1, 2));
        let s = Matrix::scalar(q(), 3, &half);
        assert_eq!(
            s.determinant().unwrap(),
            Value::Rat(rational_from_ints(1, 8))
        );

        let m = Matrix::from_i64_rows(f101(), &[&[3, 1], &[5, 2]]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).unwrap().is_identity());
        assert!(Matrix::zero(f101(), 2, 2).inverse().is_err());
    }

    #[test]
    fn restrict_scalars_examples() {
        // Q[x]/(x^2+1): multiplication by x is a quarter turn
        let f = Field::new(&FieldSpec::NumberField {
            minpoly: vec![1, 0, 1],
        })
        .unwrap();
        let x = f.value_from_coeffs(&["0".into(), "1".into()]).unwrap();
        let m = Matrix::new(f.clone(), 1, 1, vec![x.clone()]).unwrap();
        let r = restrict_scalars(&m).unwrap();
        assert_eq!(r, Matrix::from_i64_rows(q(), &[&[0, -1], &[1, 0]]));
        assert_eq!(r.rank(), 2 * m.rank());
        assert_eq!(r.normalized_rank(), m.normalized_rank());

        let z = Matrix::zero(f.clone(), 3, 3);
        let rz = restrict_scalars(&z).unwrap();
        assert_eq!(rz, Matrix::zero(q(), 6, 6));

        let d = Matrix::diagonal(f.clone(), &[x, f.zero()]);
        let rd = restrict_scalars(&d).unwrap();
        assert_eq!(rd.rows(), 4);
        assert_eq!(rd.rank(), 2);
        assert_eq!(rd.normalized_rank(), d.normalized_rank());
    }

    #[test]
    fn restriction_is_a_ring_homomorphism() {
        let f = Field::new(&FieldSpec::NumberField {
            minpoly: vec![-2, 0, 1],
        })
        .unwrap();
        let x = f.value_from_coeffs(&["0".into(), "1".into()]).unwrap();
        let a = Matrix::new(
            f.clone(),
            2,
            2,
            vec![f.one(), x.clone(), f.from_i64(3), f.mul(&x, &x)],
        )
        .unwrap();
        let b = Matrix::new(
            f.clone(),
            2,
            2,
            vec![x.clone(), f.zero(), f.neg(&f.one()), x.clone()],
        )
        .unwrap();
        assert_eq!(
            restrict_scalars(&a.mul(&b).unwrap()).unwrap(),
            restrict_scalars(&a)
                .unwrap()
                .mul(&restrict_scalars(&b).unwrap())
                .unwrap()
        );
        assert_eq!(
            restrict_scalars(&a.add(&b).unwrap()).unwrap(),
            restrict_scalars(&a)
                .unwrap()
                .add(&restrict_scalars(&b).unwrap())
                .unwrap()
        );
        assert_eq!(restrict_scalars(&a).unwrap().rank(), 2 * a.rank());

        // randomized samples with a tiny deterministic generator
        let mut state = 0x77aa_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 11) as i64 - 5
        };
        for _ in 0..25 {
            let sample = |next: &mut dyn FnMut() -> i64| {
                let entries: Vec<Value> = (0..4)
                    .map(|_| {
                        f.value_from_coeffs(&[next().to_string(), next().to_string()])
                            .unwrap()
                    })
                    .collect();
                Matrix::new(f.clone(), 2, 2, entries).unwrap()
            };
            let a = sample(&mut next);
            let b = sample(&mut next);
            assert_eq!(
                restrict_scalars(&a.mul(&b).unwrap()).unwrap(),
                restrict_scalars(&a)
                    .unwrap()
                    .mul(&restrict_scalars(&b).unwrap())
                    .unwrap()
            );
            assert_eq!(
                restrict_scalars(&a.add(&b).unwrap()).unwrap(),
                restrict_scalars(&a)
                    .unwrap()
                    .add(&restrict_scalars(&b).unwrap())
                    .unwrap()
            );
            assert_eq!(restrict_scalars(&a).unwrap().rank(), 2 * a.rank());
        }
    }

    #[test]
    fn empty_matrix_conventions() {
        let e = Matrix::zero(q(), 0, 0);
        assert_eq!(e.rank(), 0);
        assert_eq!(e.normalized_rank(), Rational::zero());
        assert_eq!(e.determinant().unwrap(), q().one());
        assert!(e.is_invertible());
    }

    #[test]
    fn restrict_scalars_rejects_non_square() {
        let f = Field::new(&FieldSpec::NumberField {
            minpoly: vec![1, 0, 1],
        })
        .unwrap();
        let m = Matrix::zero(f, 1, 2);
        assert!(matches!(restrict_scalars(&m), Err(Error::NotSquare { .. })));
        assert!(restrict_scalars(&Matrix::zero(q(), 2, 2)).is_err());
    }

    #[test]
    fn number_field_rank() {
        let f = Field::new(&FieldSpec::NumberField {
            minpoly: vec![1, 0, 1],
        })
        .unwrap();
        let x = f.value_from_coeffs(&["0".into(), "1".into()]).unwrap();
        // [[x, 1], [-1, x]] has determinant x^2 + 1 = 0: rank 1
        let m = Matrix::new(
            f.clone(),
            2,
            2,
            vec![x.clone(), f.one(), f.neg(&f.one()), x.clone()],
        )
        .unwrap();
        assert_eq!(m.rank(), 1);
        assert!(f.is_zero(&m.determinant().unwrap()));
    }
}
