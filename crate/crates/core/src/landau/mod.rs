//! Landau free energies in the static approximation: evaluation, global
//! minimization over the magnetization, the critical point and the first-order
//! transition line.

mod critical;
mod free_energy;
pub mod jet;
mod minimize;
pub mod quadrature;
mod transition;

pub use critical::{critical_point, critical_points, CriticalPoint, MIN_S, RESIDUAL_TOLERANCE};
pub use free_energy::{
    free_energy_finite, free_energy_finite_temperature, free_energy_scaled, free_energy_thermo, ln_2cosh,
    FreeEnergyFamily, JDistribution, Variant, DEFAULT_QUAD_NODES, MIN_QUAD_NODES,
};
pub use minimize::{minimize_over_m, Minimum, DEGENERACY_TOLERANCE};
pub use transition::{
    largest_jump, transition_line, write_transition_csv, TransitionLine, TransitionPoint, JUMP_THRESHOLD,
    TRANSITION_CSV_HEADER,
};
