//! Workbench JSON formats.
//!
//! All rationals are emitted as canonical strings (`"2/3"`, `"-1"`, `"0"`),
//! prime-field residues as decimal strings, and number-field elements as
//! coefficient arrays low-to-high. Maps are ordered, so re-serializing a
//! parsed document is byte-identical.

use std::collections::BTreeMap;

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::certify::{AlgebraPatch, AlmostRep, PartialGroupTable};
use crate::error::Error;
use crate::field::{parse_rational, Field, FieldSpec, Rational, Value};
use crate::matrix::Matrix;

/// Serde adapter for [`Rational`] fields: canonical string form.
pub mod rat {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).ok_or_else(|| D::Error::custom(format!("bad rational {raw:?}")))
    }
}

/// Serde adapter for `Option<Rational>`.
pub mod rat_opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let raw = Option::<String>::deserialize(d)?;
        raw.map(|r| {
            parse_rational(&r).ok_or_else(|| D::Error::custom(format!("bad rational {r:?}")))
        })
        .transpose()
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = v.iter().map(|r| r.to_string()).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter()
            .map(|r| {
                parse_rational(r).ok_or_else(|| D::Error::custom(format!("bad rational {r:?}")))
            })
            .collect()
    }
}

/// One matrix entry on the wire: a canonical string over `Q`/`F_p`, a
/// coefficient array over a number field.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Scalar(String),
    Coeffs(Vec<String>),
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<EntryJson>>,
}

fn value_to_entry(field: &Field, v: &Value) -> EntryJson {
    match field.value_coeff_strings(v) {
        Some(coeffs) => EntryJson::Coeffs(coeffs),
        None => EntryJson::Scalar(field.format_value(v)),
    }
}

fn entry_to_value(field: &Field, e: &EntryJson) -> Result<Value, Error> {
    match e {
        EntryJson::Scalar(s) => field.parse_value(s),
        EntryJson::Coeffs(c) => field.value_from_coeffs(c),
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let entries = (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| value_to_entry(self.field(), self.at(i, j)))
                    .collect()
            })
            .collect();
        MatrixJson {
            field: self.field().spec(),
            rows: self.rows(),
            cols: self.cols(),
            entries,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let field = Field::new(&j.field).map_err(D::Error::custom)?;
        if j.entries.len() != j.rows {
            return Err(D::Error::custom("row count mismatch"));
        }
        let mut entries = Vec::with_capacity(j.rows * j.cols);
        for row in &j.entries {
            if row.len() != j.cols {
                return Err(D::Error::custom("column count mismatch"));
            }
            for e in row {
                entries.push(entry_to_value(&field, e).map_err(D::Error::custom)?);
            }
        }
        Matrix::new(field, j.rows, j.cols, entries).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    elements: Vec<String>,
    product: BTreeMap<String, String>,
    inverse: BTreeMap<String, String>,
}

impl Serialize for PartialGroupTable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let product = self
            .products()
            .map(|((g, h), gh)| (format!("{g},{h}"), gh.clone()))
            .collect();
        TableJson {
            elements: self.elements().to_vec(),
            product,
            inverse: self.inverses().clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartialGroupTable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<PartialGroupTable, D::Error> {
        let j = TableJson::deserialize(d)?;
        let mut product = BTreeMap::new();
        for (key, gh) in j.product {
            let (g, h) = key
                .split_once(',')
                .ok_or_else(|| D::Error::custom(format!("bad product key {key:?}")))?;
            product.insert((g.to_string(), h.to_string()), gh);
        }
        PartialGroupTable::new(j.elements, product, j.inverse).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RepJson {
    table: PartialGroupTable,
    field: FieldSpec,
    dim: usize,
    matrices: BTreeMap<String, Matrix>,
}

impl Serialize for AlmostRep {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RepJson {
            table: self.table().clone(),
            field: self.field().spec(),
            dim: self.dim(),
            matrices: self.matrices().clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlmostRep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<AlmostRep, D::Error> {
        let j = RepJson::deserialize(d)?;
        let field = Field::new(&j.field).map_err(D::Error::custom)?;
        AlmostRep::new(j.table, field, j.dim, j.matrices).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PatchJson {
    field: FieldSpec,
    basis: Vec<String>,
    /// `"xi,xj"` -> sparse coefficient map of the product in the basis.
    products: BTreeMap<String, BTreeMap<String, EntryJson>>,
}

impl Serialize for AlgebraPatch {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let field = self.field();
        let products = self
            .products()
            .map(|((a, b), coeffs)| {
                let m: BTreeMap<String, EntryJson> = coeffs
                    .iter()
                    .map(|(label, v)| (label.clone(), value_to_entry(field, v)))
                    .collect();
                (format!("{a},{b}"), m)
            })
            .collect();
        PatchJson {
            field: field.spec(),
            basis: self.basis().to_vec(),
            products,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraPatch {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<AlgebraPatch, D::Error> {
        let j = PatchJson::deserialize(d)?;
        let field = Field::new(&j.field).map_err(D::Error::custom)?;
        let mut products = BTreeMap::new();
        for (key, coeffs) in j.products {
            let (a, b) = key
                .split_once(',')
                .ok_or_else(|| D::Error::custom(format!("bad product key {key:?}")))?;
            let mut parsed = BTreeMap::new();
            for (label, entry) in &coeffs {
                parsed.insert(
                    label.clone(),
                    entry_to_value(&field, entry).map_err(D::Error::custom)?,
                );
            }
            products.insert((a.to_string(), b.to_string()), parsed);
        }
        AlgebraPatch::new(field, j.basis, products).map_err(D::Error::custom)
    }
}
