//! Resonance-assisted tunneling in the periodically kicked Lipkin-Meshkov-Glick model.
//!
//! The crate is organised along the analysis pipeline:
//!
//! * [`quantum`]: spin operators, the static Hamiltonian, its parity-resolved spectrum,
//!   quantum periods and per-`J` kick-period calibration;
//! * [`floquet`]: the Floquet operator, quasienergies and the resonant pair splitting;
//! * [`classical`]: the classical limit on the Bloch sphere, the stroboscopic map and the
//!   orbit period integral;
//! * [`extraction`]: separatrix scans, island areas, monodromy and the effective pendulum;
//! * [`analysis`]: sweeps over `(J, eps)`, power-law fits and the RAT validity bound.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod classical;
pub mod error;
pub mod extraction;
pub mod floquet;
pub mod linalg;
pub mod params;
pub mod quantum;

pub use error::{Error, Result};
pub use params::{Kick, Lmg, ModelParams, Resonance, Spin};

/// Classical resonant energy of the torus with period 8 at `(omega0, gamma_x) = (1, -0.95)`.
pub const REFERENCE_RESONANT_ENERGY: f64 = -0.723276;
