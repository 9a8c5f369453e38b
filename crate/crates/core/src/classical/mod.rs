//! Classical limit: mean-field energy, Hamiltonian flow, kicks, the stroboscopic map and
//! the period of unperturbed orbits.

pub mod flow;
pub mod integrator;
pub mod map;
pub mod period;
pub mod phase;

pub use flow::{integrate_flow, Flow, Trajectory};
pub use map::{poincare_section, stroboscopic_map, SectionConvention, StroboscopicMap};
pub use period::{classical_period, find_resonant_energy};
pub use phase::{angle_diff, apply_kick, classical_energy, fold_angle, hamilton_rhs, z_on_contour, PhasePoint};
