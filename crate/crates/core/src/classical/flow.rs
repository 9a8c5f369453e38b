use serde::{Deserialize, Serialize};

use super::integrator::Dop853;
use super::phase::{classical_energy, fold_angle, hamilton_rhs, PhasePoint};
use crate::error::{Error, Result};
use crate::params::Lmg;

pub const DEFAULT_FLOW_TOL: f64 = 1e-12;
pub const DEFAULT_DRIFT_TOL: f64 = 1e-10;

/// Time-stamped orbit samples.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// Largest `|H0(point) - H0(start of segment)|` over kick-free segments.
    pub energy_drift: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Integrator for the free flow of `H0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub lmg: Lmg,
    pub tol: f64,
    pub drift_tol: f64,
}

impl Flow {
    pub fn new(lmg: Lmg) -> Self {
        Self { lmg, tol: DEFAULT_FLOW_TOL, drift_tol: DEFAULT_DRIFT_TOL }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_drift_tol(mut self, drift_tol: f64) -> Self {
        self.drift_tol = drift_tol;
        self
    }

    fn rhs(&self) -> impl Fn(&[f64; 2]) -> [f64; 2] + '_ {
        move |y: &[f64; 2]| {
            let (a, b) = hamilton_rhs(y[0], y[1], &self.lmg);
            [a, b]
        }
    }

    /// Evolve `(phi, z)` for `duration`; `phi` is returned unwrapped.
    ///
    /// Checks the energy at the end point against the drift contract.
    pub fn advance(&self, phi: f64, z: f64, duration: f64) -> Result<(f64, f64)> {
        let rk = Dop853::new(self.tol);
        let y = rk.integrate(self.rhs(), [phi, z], duration, |_, _| {})?;
        let drift = (classical_energy(y[0], y[1], &self.lmg) - classical_energy(phi, z, &self.lmg)).abs();
        if drift > self.drift_tol {
            return Err(Error::IntegrationAccuracy { drift, tol: self.drift_tol });
        }
        Ok((y[0], y[1].clamp(-1.0, 1.0)))
    }

    /// Full trajectory sampled at every accepted step.
    pub fn integrate(&self, p: PhasePoint, duration: f64) -> Result<Trajectory> {
        if !(duration >= 0.0) {
            return Err(Error::InvalidParameter(format!("duration must be >= 0, got {duration}")));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("integration tolerance must be > 0".into()));
        }
        let e0 = classical_energy(p.phi, p.z, &self.lmg);
        let mut traj = Trajectory::default();
        let rk = Dop853::new(self.tol);
        rk.integrate(self.rhs(), [p.phi, p.z], duration, |t, y| {
            traj.times.push(t);
            traj.points.push(PhasePoint { phi: fold_angle(y[0]), z: y[1].clamp(-1.0, 1.0) });
            let d = (classical_energy(y[0], y[1], &self.lmg) - e0).abs();
            traj.energy_drift = traj.energy_drift.max(d);
        })?;
        if traj.energy_drift > self.drift_tol {
            return Err(Error::IntegrationAccuracy { drift: traj.energy_drift, tol: self.drift_tol });
        }
        Ok(traj)
    }
}

/// Integrate the `H0` flow from `p` for `duration` with local tolerance `tol`.
pub fn integrate_flow(p: PhasePoint, duration: f64, tol: f64, lmg: &Lmg) -> Result<Trajectory> {
    Flow::new(*lmg).with_tol(tol).integrate(p, duration)
}
