//! p-typical Witt vectors.

pub mod base;
pub mod poly;
pub mod structure;
pub mod vector;

pub use base::{BaseTag, IntPoly, Integers, PrimeField, PrimeFieldPoly, WittBase};
pub use poly::{MPoly, Mono};
pub use structure::{structure_polys, GhostIdentityCheck, WittStructurePolys, MAX_LENGTH};
pub use vector::WittVector;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WittError {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("truncation length would drop below 1")]
    TruncationUnderflow,
    #[error("mismatched truncation: {left} vs {right}")]
    MismatchedTruncation { left: usize, right: usize },
    #[error("mismatched prime: {left} vs {right}")]
    MismatchedPrime { left: u64, right: u64 },
    #[error("mismatched base rings")]
    MismatchedBase,
    #[error("ghost map needs a p-torsion-free base")]
    BaseHasPTorsion,
    #[error("component {component} has degree {degree}, above the bound {bound}")]
    DegreeOverflow { component: usize, degree: usize, bound: usize },
    #[error("length {n} exceeds the supported maximum {max}")]
    LengthTooLarge { n: usize, max: usize },
    #[error("non-integral coefficient at p={p}, component {m}")]
    Integrality { p: u64, m: usize },
    #[error("ghost vector is not in the image of the ghost map (component {0})")]
    NotGhostImage(usize),
    #[error("invalid component: {0}")]
    InvalidComponent(String),
}
