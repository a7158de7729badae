use thiserror::Error;

/// Errors shared across the workbench.
///
/// Verdict-level failures (an uncertified rep, a rejected reduction) are not
/// errors; they are reported in the corresponding report structs. `Error` is
/// reserved for inputs that violate a documented precondition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} exceeds the 2^61 arithmetic cap")]
    PrimeTooLarge(u64),
    #[error("minimal polynomial must be monic with degree >= 1")]
    BadMinimalPolynomial,
    #[error("minimal polynomial is not squarefree (gcd with derivative is nonconstant)")]
    NotSquarefree,
    #[error("cannot parse {0:?} as an element of {1}")]
    BadElement(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is a zero divisor (reducible minimal polynomial)")]
    ZeroDivisor,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    SizeMismatch { left: String, right: String },
    #[error("field mismatch between operands")]
    FieldMismatch,
    #[error("requested minor size {requested} exceeds rank {rank}")]
    MinorTooLarge { requested: usize, rank: usize },
    #[error("matrix of size {size} exceeds the row budget {budget}")]
    BudgetExceeded { size: usize, budget: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("{0}")]
    BadPermutation(String),
    #[error("invalid group table: {0}")]
    BadTable(String),
    #[error("invalid representation: {0}")]
    BadRep(String),
    #[error("invalid algebra patch: {0}")]
    BadPatch(String),
    #[error("invalid extension data: {0}")]
    BadExtension(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("{0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
