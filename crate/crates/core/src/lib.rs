//! Simulation and analysis of the LHZ parity architecture under homogeneous
//! and inhomogeneous transverse-field driving.
//!
//! * [`lhz`] builds the parity lattice and problem instances.
//! * [`schedule`] holds the driving protocols.
//! * [`dynamics`] integrates annealing sweeps exactly and measures spectra.
//! * [`magnetization`] relates constraint energy to magnetization.
//! * [`landau`] evaluates free-energy surfaces and locates the critical point
//!   and first-order line of the phase diagram.

pub mod dynamics;
pub mod error;
pub mod landau;
pub mod lhz;
pub mod magnetization;
pub mod schedule;
pub mod stats;

pub use error::{Error, Result};
pub use lhz::{counts, sample_instance, Counts, LhzInstance, LhzLayout, Representation};
pub use schedule::{DriveKind, Schedule, SwitchOrder};
