//! Exact-arithmetic workbench for rank-metric almost-representations of
//! groups and algebras: construction, certification, amplification, and
//! field reduction, all over exact fields (`Q`, `F_p`, number fields).

pub mod amplify;
pub mod certify;
pub mod construct;
pub mod error;
pub mod field;
pub mod jordan;
pub mod json;
pub mod matrix;
pub mod perm;
pub mod reduce;

pub use error::{Error, Result};
pub use field::{Field, FieldSpec, Rational, Value};
pub use matrix::Matrix;

/// Hard cap on the number of rows of any matrix the amplification and
/// combination operations are allowed to materialize. Exceeding it is an
/// error, never a silent truncation.
pub const DEFAULT_BUDGET: usize = 16384;
