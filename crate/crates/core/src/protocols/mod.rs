//! End-to-end logical-gate protocols: pump, twist, shuffle, teleportation
//! and glue–twist–deglue, each reported as a [`ProtocolReport`].

mod gtg;
mod report;
mod ring;
mod shuffle;
mod teleport;

pub use gtg::{glue_schedule, glued_couplings, gtg_code, gtg_network, run_gtg, run_gtg_sweep, GtgOptions, TwistKind};
pub use report::{
    controlled_z_gate, hadamard_gate, pauli_x_gate, pauli_z_gate, phase_equivalent_fidelity, PhaseBook,
    ProtocolReport, SweepRow, DEFAULT_LEAKAGE_THRESHOLD,
};
pub use ring::{run_pump, run_pump_times, run_twist, run_twist_times};
pub use shuffle::{lowest_singlets, run_shuffle, run_shuffle_sweep, shuffle_schedule, ShuffleOptions};
pub use teleport::{random_qubit, run_teleport_h, teleport_report, Teleported};

#[cfg(test)]
mod tests;
