//! Sparse matrix storage and the direct solver kernel.

mod lu;
mod matrix;

pub use lu::{factor, FactorKind, Factorization, SINGULAR_PIVOT_RATIO};
pub use matrix::{assemble, SparseMatrix};
