//! Lowest eigenpairs of sparse Hermitian operators.

mod lanczos;

pub use lanczos::{
    degeneracy, default_split_tol, lowest_eigenpairs, lowest_eigenpairs_with, EigenSolution,
    LanczosOptions,
};
