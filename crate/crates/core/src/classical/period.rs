use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::Lmg;

pub const DEFAULT_QUAD_TOL: f64 = 1e-13;
const MAX_NODES: usize = 1 << 22;

/// `w0^2 - 2 E G + G^2` with `G = gamma_x cos^2 phi`; the squared angular velocity on the
/// rotational branch.
fn discriminant(phi: f64, energy: f64, lmg: &Lmg) -> f64 {
    let g = lmg.gamma_x * phi.cos().powi(2);
    lmg.omega0 * lmg.omega0 - 2.0 * energy * g + g * g
}

/// True when the whole energy contour is a rotational orbit (integrand real and finite).
///
/// A rotational contour separates the poles, so its energy lies between theirs,
/// `-w0` and `w0`.
pub fn in_rotational_family(energy: f64, lmg: &Lmg) -> bool {
    if !(energy.abs() <= lmg.omega0.abs()) {
        return false;
    }
    // The discriminant is convex in G, G ranges over [min(gamma, 0), max(gamma, 0)].
    let (lo, hi) = if lmg.gamma_x < 0.0 { (lmg.gamma_x, 0.0) } else { (0.0, lmg.gamma_x) };
    let d = |g: f64| lmg.omega0 * lmg.omega0 - 2.0 * energy * g + g * g;
    let mut min = d(lo).min(d(hi));
    if energy > lo && energy < hi {
        min = min.min(d(energy));
    }
    min > 0.0
}

/// Orbit period `T(E) = int_0^{2 pi} dphi / sqrt(w0^2 - 2 E G(phi) + G(phi)^2)`.
///
/// The integrand is smooth and periodic, so the trapezoidal rule converges
/// geometrically; the node count is doubled until two successive estimates agree to
/// `quad_tol` (relative).
pub fn classical_period(energy: f64, lmg: &Lmg, quad_tol: f64) -> Result<f64> {
    if !in_rotational_family(energy, lmg) {
        return Err(Error::EnergyOutOfFamily { energy });
    }
    let f = |phi: f64| 1.0 / discriminant(phi, energy, lmg).sqrt();
    let mut n = 16usize;
    let mut sum: f64 = (0..n).map(|i| f(2.0 * PI * i as f64 / n as f64)).sum();
    let mut estimate = 2.0 * PI * sum / n as f64;
    loop {
        // the refined rule reuses the old nodes and adds the midpoints
        let mid: f64 = (0..n).map(|i| f(2.0 * PI * (i as f64 + 0.5) / n as f64)).sum();
        sum += mid;
        n *= 2;
        let refined = 2.0 * PI * sum / n as f64;
        if !refined.is_finite() {
            return Err(Error::EnergyOutOfFamily { energy });
        }
        if (refined - estimate).abs() <= quad_tol * refined.abs() {
            return Ok(refined);
        }
        if n >= MAX_NODES {
            return Err(Error::NotConverged { iterations: n, residual: (refined - estimate).abs() });
        }
        estimate = refined;
    }
}

/// Range of energies spanned by the rotational family, sampled for bracketing.
fn family_grid(lmg: &Lmg, n: usize) -> Vec<f64> {
    let span = lmg.omega0.abs() + lmg.gamma_x.abs();
    (0..=n)
        .map(|i| -span + 2.0 * span * i as f64 / n as f64)
        .filter(|&e| in_rotational_family(e, lmg))
        .collect()
}

/// Energy of the orbit with period `t_target`, by bracketing on a grid then bisection.
pub fn find_resonant_energy(t_target: f64, lmg: &Lmg, quad_tol: f64) -> Result<f64> {
    let grid = family_grid(lmg, 400);
    let g = |e: f64| classical_period(e, lmg, quad_tol).map(|t| t - t_target);
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for &e in &grid {
        let v = g(e)?;
        if v == 0.0 {
            return Ok(e);
        }
        if let Some((pe, pv)) = prev {
            if pv.signum() != v.signum() {
                bracket = Some((pe, pv, e));
                break;
            }
        }
        prev = Some((e, v));
    }
    let (mut lo, lo_val, mut hi) = bracket.ok_or_else(|| {
        Error::NotFound(format!("no orbit with period {t_target} in the rotational family"))
    })?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-14 {
            break;
        }
        let v = g(mid)?;
        if v.signum() == lo_val.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
