//! Exact-diagonalization toolkit for dimer-encoded spin-1/2 qubits.
//!
//! The numerical core (operators, states, eigensolver, propagator) is generic
//! over [`Real`]; the aliases below fix it to `f64`, which every model,
//! protocol and observable uses.

pub mod duality;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod logical;
pub mod models;
pub mod observables;
pub mod protocols;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Operator = hilbert::SparseOperator<f64>;
pub type State = hilbert::StateVector<f64>;
