//! Order parameters and ladder phase classification.

mod classify;
mod measures;

pub use classify::{
    classify_ground_space, classify_phase, classify_with, ladder_ground_space, write_scan_csv, ClassifyOptions,
    GroundSpace, PhaseLabel, PhasePoint,
};
pub use measures::{
    bond_correlation, dimer_order, dimer_order_operator, rung_singlet_density, string_order,
    twist_expectation,
};

#[cfg(test)]
mod tests;
