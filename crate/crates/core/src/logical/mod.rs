//! Code spaces, logical operators and extraction of logical actions.

mod action;
mod code;
mod states;

pub use action::{
    bloch_readout, closest_unitary, extract_action, gate_fidelity, phase_corrected, singular_values,
    wrap_angle, BlochInput, LogicalAction, Process,
};
pub use code::{code_from_states, CodeMeta, LogicalCode, RingQubit};
pub use states::{
    dimer_state, ladder_translation, plus_twist_operator, ring_covering, twist_operator,
    ring_translation,
};
