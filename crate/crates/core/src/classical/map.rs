use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::{Trajectory, DEFAULT_DRIFT_TOL};
use super::integrator::Dop853;
use super::phase::{angle_diff, classical_energy, fold_angle, hamilton_rhs, kick_raw, PhasePoint};
use crate::error::{Error, Result};
use crate::params::{Kick, Lmg};

/// Default step of the fixed-step flow inside the map; keeps the energy drift near 1e-13 at
/// the default coupling.
pub const DEFAULT_MAP_STEP: f64 = 0.1;

/// Where within the drive period the stroboscopic section is taken.
///
/// All three give conjugate maps with identical island areas, traces and splittings;
/// only `SplitKick` is reversible under `phi -> -phi`, which pins the island centres of
/// symmetric resonances to the lines `phi = 0` and `phi = pi`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionConvention {
    /// Half kick, flow for `tau`, half kick; sampled at the kick.
    #[default]
    SplitKick,
    /// Flow for `tau`, then kick; points are sampled right after the kick.
    PostKick,
    /// Kick, then flow for `tau`; points are sampled right before the kick.
    PreKick,
}

/// One drive period of classical dynamics, `P: (phi, z) -> (phi', z')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StroboscopicMap {
    pub lmg: Lmg,
    pub kick: Kick,
    pub convention: SectionConvention,
    /// Upper bound on the integrator step between kicks.
    pub max_step: f64,
    pub drift_tol: f64,
}

impl StroboscopicMap {
    pub fn new(lmg: Lmg, kick: Kick) -> Self {
        Self {
            lmg,
            kick,
            convention: SectionConvention::default(),
            max_step: DEFAULT_MAP_STEP,
            drift_tol: DEFAULT_DRIFT_TOL,
        }
    }

    pub fn with_convention(mut self, convention: SectionConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    /// Free flow, also returning the energy change over the segment.
    fn flow(&self, phi: f64, z: f64, duration: f64) -> Result<(f64, f64, f64)> {
        let n = (duration / self.max_step).ceil().max(1.0) as usize;
        let lmg = self.lmg;
        let y = Dop853::integrate_fixed(
            move |y: &[f64; 2]| {
                let (a, b) = hamilton_rhs(y[0], y[1], &lmg);
                [a, b]
            },
            [phi, z],
            duration,
            n,
        );
        let drift = (classical_energy(y[0], y[1], &lmg) - classical_energy(phi, z, &lmg)).abs();
        if !(drift <= self.drift_tol) {
            return Err(Error::IntegrationAccuracy { drift, tol: self.drift_tol });
        }
        Ok((y[0], y[1].clamp(-1.0, 1.0), drift))
    }

    fn kick(&self, phi: f64, z: f64) -> (f64, f64) {
        self.kick_by(phi, z, self.kick.epsilon)
    }

    fn kick_by(&self, phi: f64, z: f64, epsilon: f64) -> (f64, f64) {
        let (kphi, kz) = kick_raw(phi, z, epsilon);
        // keep the winding of phi so callers can count revolutions
        (phi + angle_diff(kphi, phi), kz)
    }

    /// One period without folding `phi`, plus the energy drift of its kick-free segment.
    fn step(&self, phi: f64, z: f64) -> Result<(f64, f64, f64)> {
        let tau = self.kick.tau;
        match self.convention {
            SectionConvention::SplitKick => {
                let (p, q) = self.kick_by(phi, z, 0.5 * self.kick.epsilon);
                let (p, q, drift) = self.flow(p, q, tau)?;
                let (p, q) = self.kick_by(p, q, 0.5 * self.kick.epsilon);
                Ok((p, q, drift))
            }
            SectionConvention::PostKick => {
                let (p, q, drift) = self.flow(phi, z, tau)?;
                let (p, q) = self.kick(p, q);
                Ok((p, q, drift))
            }
            SectionConvention::PreKick => {
                let (p, q) = self.kick(phi, z);
                self.flow(p, q, tau)
            }
        }
    }

    /// One period without folding `phi`, so that the accumulated rotation is visible.
    pub fn apply_raw(&self, phi: f64, z: f64) -> Result<(f64, f64)> {
        let (p, q, _) = self.step(phi, z)?;
        Ok((p, q))
    }

    pub fn apply(&self, p: PhasePoint) -> Result<PhasePoint> {
        let (phi, z) = self.apply_raw(p.phi, p.z)?;
        Ok(PhasePoint { phi: fold_angle(phi), z })
    }

    /// `P^n(p)`.
    pub fn iterate(&self, p: PhasePoint, n: usize) -> Result<PhasePoint> {
        let (mut phi, mut z) = (p.phi, p.z);
        for _ in 0..n {
            (phi, z) = self.apply_raw(phi, z)?;
        }
        Ok(PhasePoint { phi: fold_angle(phi), z })
    }

    /// `P^n` on raw coordinates, keeping the unwrapped `phi`.
    pub fn iterate_raw(&self, phi: f64, z: f64, n: usize) -> Result<(f64, f64)> {
        let (mut phi, mut z) = (phi, z);
        for _ in 0..n {
            (phi, z) = self.apply_raw(phi, z)?;
        }
        Ok((phi, z))
    }
}

/// One stroboscopic step with the default section convention.
pub fn stroboscopic_map(p: PhasePoint, lmg: &Lmg, kick: &Kick) -> Result<PhasePoint> {
    StroboscopicMap::new(*lmg, *kick).apply(p)
}

/// `n_iter` stroboscopic iterates of every seed, seeds processed in parallel.
///
/// Each trajectory starts with its seed; `energy_drift` records the largest change of
/// `H0` within the free flow of a single period. The kicks themselves change `H0`.
pub fn poincare_section(seeds: &[PhasePoint], n_iter: usize, map: &StroboscopicMap) -> Result<Vec<Trajectory>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let mut traj = Trajectory {
                times: Vec::with_capacity(n_iter + 1),
                points: Vec::with_capacity(n_iter + 1),
                energy_drift: 0.0,
            };
            traj.times.push(0.0);
            traj.points.push(seed);
            let (mut phi, mut z) = (seed.phi, seed.z);
            for i in 1..=n_iter {
                let drift;
                (phi, z, drift) = map.step(phi, z)?;
                phi = fold_angle(phi);
                traj.times.push(i as f64 * map.kick.tau);
                traj.points.push(PhasePoint { phi, z });
                traj.energy_drift = traj.energy_drift.max(drift);
            }
            Ok(traj)
        })
        .collect()
}
