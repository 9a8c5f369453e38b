//! Parameter sweeps, log-log fits and the validity bound of resonance-assisted tunneling.

pub mod fit;
pub mod sweep;

pub use fit::{loglog_fit, PowerLawFit, MIN_FIT_POINTS};
pub use sweep::{
    check_grid, classical_point, classical_table, fit_area, fit_coupling, join_curve, log_grid, numeric_crossing,
    quantum_sweep, scaling_epsilon_max, splitting_curve, sweep_splitting, ClassicalPoint, CouplingFit,
    IslandSummary, QuantumPoint, QuantumSweepConfig, SplittingCurve, SplittingRow,
};
