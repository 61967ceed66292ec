//! Lattice layouts and Hamiltonian assembly.

mod assemble;
mod builders;
mod layout;

pub use assemble::{
    assemble, assemble_with_flux, class_operators, flux_class_terms, heisenberg_sum, BondPart,
    ClassTerm, FluxPart,
};
pub use builders::{
    chain_j1j2, chain_staggered, corner_cluster, ladder, ring_network, tfim_chain, RingSpec,
};
pub use layout::{
    Bond, Corner, CornerKind, CornerSpec, CouplingAssignment, CouplingClass, Field, LatticeLayout,
    LayoutKind, Site,
};
