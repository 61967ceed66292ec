//! Unitary time evolution under static and scheduled Hamiltonians.

mod krylov;
mod schedule;

pub use krylov::{evolve_static, evolve_static_with, KrylovOptions};
pub use schedule::{
    adiabatic_metric, evolve_schedule, evolve_schedule_tracked, evolve_with, leakage, step_grid,
    FluxControl, Ramp, Schedule, ScheduleHamiltonian, Segment, Trajectory, Window,
};
