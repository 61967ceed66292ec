//! Spin-1/2 Hilbert spaces, sparse operators and states.

mod basis;
pub mod dense;
mod operator;
pub mod ops;
mod state;

pub use basis::{twice_sz, HalfInt, SpinBasis, MAX_SITES};
pub use operator::{OperatorCombination, SparseOperator};
pub use ops::{exchange_bond, permutation_operator, twisted_exchange_bond};
pub use state::{inner, norm, StateVector};

use std::sync::Arc;

/// Shared-basis constructor mirroring `SpinBasis::new`.
pub fn build_basis(n_sites: usize, sector: Option<HalfInt>) -> crate::Result<Arc<SpinBasis>> {
    Ok(Arc::new(SpinBasis::new(n_sites, sector)?))
}
