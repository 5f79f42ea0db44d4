//! Exact state-vector annealing sweeps, instantaneous spectra and
//! performance metrics.

mod ensemble;
mod hamiltonian;
mod metrics;
mod propagate;
mod spectrum;

pub use ensemble::{
    default_t_f_grid, ensemble_run, log_grid, write_sweep_csv, EnsembleConfig, EnsembleOutcome,
    InstanceFailure, SweepRow, SWEEP_CSV_HEADER,
};
pub use hamiltonian::{hamiltonian_at, Annealer, SpinHamiltonian, StateVector, DEFAULT_MAX_SPINS};
pub use metrics::{fidelity_sq, fidelity_sq_diag, residual_energy, residual_energy_diag, GroundLevel};
pub use propagate::{evolve, evolve_with, EvolveOptions, Evolution, NORM_DRIFT_LIMIT};
pub use spectrum::{
    eigenvalues, gap_at, min_gap, min_gap_of, min_gap_with, spectrum_at, spectrum_of, GapInfo, GAP_WINDOW, MIN_GAP_GRID,
};
