//! Semiclassical and quantum Rabi model dynamics.
//!
//! The semiclassical model drives a qubit with a classical field
//! `H = (Ω/2)σ_z + G(σ_+ + σ_−)cos(ωt)` and is solved at four levels of
//! approximation in [`srm`], with dissipation in [`srm_dissipative`]. The quantum
//! model replaces the drive by a cavity mode prepared in a large coherent state
//! and is solved over a truncated Fock window for one to three identical qubits
//! in [`qrm`] (pure states) and [`qrm_dissipative`] (Lindblad evolution).
//! Everything is expressed in units of the field frequency ω.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod fock;
pub mod integrator;
pub mod params;
pub mod qrm;
pub mod qrm_dissipative;
pub mod series;
pub mod special_fn;
pub mod srm;
pub mod srm_dissipative;

pub use error::{Error, Result};
pub use fock::{build_window, coherent_amplitudes, initial_joint_state, FockWindow, JointState};
pub use integrator::{Integrator, StepStats, Tolerances};
pub use params::{ModelParams, QubitAmplitudes};
pub use series::TimeSeries;
