//! Exact algebra for p-typical Witt vectors, de Rham–Witt complexes of
//! `F_p[x]`, η-deformed Cartier complexes, filtered chain complexes and
//! Dieudonné modules over `F_p`.

pub mod json;
pub mod cartier;
pub mod eta;
pub mod dieudonne;
pub mod drw;
pub mod filtered;
pub mod linalg;
pub mod suite;
pub mod oracle;
pub mod witt;

pub use linalg::{FGAbelianGroup, GradedAbelianGroup, GroupHom, GroupType, IntMatrix};
