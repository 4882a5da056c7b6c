//! Truncated de Rham–Witt complexes `W_mΩ^•` of `F_p[x]` and of `F_p`.

mod complex;
mod element;
mod expr;

pub use complex::{
    check_identities, random_element, to_cartier, DRWComplex, DRWSubcomplex, IdentityFailure, IdentityReport, Operator,
};
pub use element::{DRWElement, Weight};
pub use expr::{normalize, normalize_with_limit, Expr, STEP_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DrwError {
    #[error("term of weight {weight} exceeds the degree bound {bound}")]
    DegreeOverflow { weight: String, bound: u64 },
    #[error("truncation level would drop below 1")]
    TruncationUnderflow,
    #[error("mismatched operands: {0}")]
    Mismatch(String),
    #[error("rewriting exceeded {0} steps")]
    StepLimit(usize),
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("parameters out of range: {0}")]
    TooLarge(String),
}
