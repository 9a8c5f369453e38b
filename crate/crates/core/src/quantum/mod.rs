//! Spin operators, the static LMG Hamiltonian and its spectrum.

pub mod cache;
pub mod spectrum;
pub mod spin;

pub use cache::{CacheStatus, SpectrumCache};
pub use spectrum::{
    build_h0, build_static_spectrum, calibrate_tau, quantum_period, select_resonant_index,
    ResonanceSpec, StaticSpectrum,
};
pub use spin::{build_spin_matrices, SpinOperators};
