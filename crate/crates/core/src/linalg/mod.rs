//! Exact linear algebra over Z, Z/N and (through ranks) Q.

mod group;
mod lattice;
mod matrix;
mod modular;
mod snf;

pub use group::{kernel_cokernel, lattice_contains, FGAbelianGroup, GradedAbelianGroup, GroupHom, GroupType};
pub use lattice::{left_kernel, preimage_quotient, row_basis, solve_rows, LeftSolver};
pub use matrix::{vec_ops, IntMatrix};
pub use modular::{intertwiner_equations, solve_commutation, SolutionModule};
pub use snf::{smith_normal_form, Smith};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("map does not respect relation {relation} of the source")]
    RelationViolation { relation: usize },
    #[error("matrix has shape {found:?}, expected {expected:?}")]
    DimensionMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("modulus must be at least 2")]
    ModulusTooSmall,
}
