use serde::{Deserialize, Serialize};

use crate::classical::{angle_diff, fold_angle, PhasePoint, StroboscopicMap};
use crate::error::{Error, Result};
use crate::params::Resonance;

pub const DEFAULT_FD_STEP: f64 = 1e-6;
pub const DET_TOL: f64 = 1e-6;
/// Largest trace change accepted when the finite-difference step is halved.
pub const STEP_CONSISTENCY_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 50, fd_step: 1e-7 }
    }
}

/// `P^r(x) - x`, with the angle difference wrapped.
fn residual(map: &StroboscopicMap, r: usize, phi: f64, z: f64) -> Result<[f64; 2]> {
    let (p, q) = map.iterate_raw(phi, z, r)?;
    Ok([angle_diff(p, phi), q - z])
}

/// Jacobian of `P^r` at `(phi, z)` by central differences, as `[[dphi'/dphi, dphi'/dz],
/// [dz'/dphi, dz'/dz]]`.
pub fn map_jacobian(map: &StroboscopicMap, r: usize, phi: f64, z: f64, h: f64) -> Result<[[f64; 2]; 2]> {
    let f = |a: f64, b: f64| map.iterate_raw(a, b, r);
    let (pp, pm) = (f(phi + h, z)?, f(phi - h, z)?);
    let (zp, zm) = (f(phi, z + h)?, f(phi, z - h)?);
    Ok([
        [(pp.0 - pm.0) / (2.0 * h), (zp.0 - zm.0) / (2.0 * h)],
        [(pp.1 - pm.1) / (2.0 * h), (zp.1 - zm.1) / (2.0 * h)],
    ])
}

/// Newton iteration for a period-`r` point of the stroboscopic map near `approx`.
pub fn locate_fixed_point(
    approx: PhasePoint,
    res: Resonance,
    map: &StroboscopicMap,
    cfg: &NewtonConfig,
) -> Result<PhasePoint> {
    let r = res.r as usize;
    let (mut phi, mut z) = (approx.phi, approx.z);
    let mut g = residual(map, r, phi, z)?;
    for _ in 0..cfg.max_iter {
        let norm = g[0].hypot(g[1]);
        if norm < cfg.tol {
            return PhasePoint::new(phi, z);
        }
        let j = map_jacobian(map, r, phi, z, cfg.fd_step)?;
        // solve (J - I) dx = -g
        let (a, b, c, d) = (j[0][0] - 1.0, j[0][1], j[1][0], j[1][1] - 1.0);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let mut dphi = -(d * g[0] - b * g[1]) / det;
        let mut dz = -(-c * g[0] + a * g[1]) / det;
        // Newton steps far beyond an island's size mean we left the basin
        let len = dphi.hypot(dz);
        if len > 0.1 {
            dphi *= 0.1 / len;
            dz *= 0.1 / len;
        }
        phi += dphi;
        z += dz;
        if z.abs() >= 1.0 {
            break;
        }
        g = residual(map, r, phi, z)?;
    }
    Err(Error::NotConverged { iterations: cfg.max_iter, residual: g[0].hypot(g[1]) })
}

/// The `r` points of the periodic orbit through `fp`.
pub fn periodic_orbit(fp: PhasePoint, res: Resonance, map: &StroboscopicMap) -> Result<Vec<PhasePoint>> {
    let mut out = vec![fp];
    let mut p = fp;
    for _ in 1..res.r {
        p = map.apply(p)?;
        out.push(p);
    }
    out.sort_by(|a, b| fold_angle(a.phi).total_cmp(&fold_angle(b.phi)));
    Ok(out)
}

/// Linearisation of `P^r` at a periodic point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub matrix: [[f64; 2]; 2],
    pub trace: f64,
    pub det: f64,
    pub fd_step: f64,
}

/// Finite-difference monodromy matrix without the stability contract.
pub fn monodromy_matrix(fp: PhasePoint, r: u32, fd_step: f64, map: &StroboscopicMap) -> Result<MonodromyResult> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidParameter(format!("fd_step must be > 0, got {fd_step}")));
    }
    let m = map_jacobian(map, r as usize, fp.phi, fp.z, fd_step)?;
    Ok(MonodromyResult {
        matrix: m,
        trace: m[0][0] + m[1][1],
        det: m[0][0] * m[1][1] - m[0][1] * m[1][0],
        fd_step,
    })
}

/// Monodromy matrix at an island centre, checked for unit determinant, ellipticity and
/// stability under halving of the finite-difference step.
pub fn monodromy(fp: PhasePoint, r: u32, fd_step: f64, map: &StroboscopicMap) -> Result<MonodromyResult> {
    let full = monodromy_matrix(fp, r, fd_step, map)?;
    if (full.det - 1.0).abs() > DET_TOL {
        return Err(Error::StepSize { det: full.det });
    }
    let half = monodromy_matrix(fp, r, 0.5 * fd_step, map)?;
    if (half.trace - full.trace).abs() > STEP_CONSISTENCY_TOL {
        return Err(Error::StepSize { det: half.det });
    }
    if !(full.trace.abs() < 2.0) {
        return Err(Error::UnstablePoint { trace: full.trace });
    }
    Ok(full)
}
