use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fixed_point::locate_fixed_point;
use crate::classical::{classical_energy, PhasePoint, StroboscopicMap, Trajectory};
use crate::error::{Error, Result};
use crate::params::Resonance;

/// Tuning of the energy-spread scan across an island.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub n_grid: usize,
    /// Stroboscopic iterates per grid point, also the classification horizon.
    pub n_iter: usize,
    pub z_tol: f64,
    /// Jumps must exceed this multiple of the median adjacent-point change.
    pub jump_factor: f64,
    /// Absolute floor on a jump; spreads below it are integration noise.
    pub min_jump: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { n_grid: 200, n_iter: 2000, z_tol: 1e-8, jump_factor: 5.0, min_jump: 1e-8 }
    }
}

/// Energy spread along a line of constant `phi` and the island boundaries found on it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparatrixScan {
    pub phi_line: f64,
    pub z_grid: Vec<f64>,
    pub stddev: Vec<f64>,
    pub z_lower: f64,
    pub z_upper: f64,
    pub z_fixed: f64,
    pub fixed_point: PhasePoint,
}

/// Population standard deviation of `H0` over the samples of `traj`.
pub fn energy_stddev_of(energies: &[f64]) -> f64 {
    if energies.is_empty() {
        return 0.0;
    }
    let n = energies.len() as f64;
    let mean = energies.iter().sum::<f64>() / n;
    let var = energies.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    var.sqrt()
}

pub fn energy_stddev(traj: &Trajectory, map: &StroboscopicMap) -> f64 {
    let e: Vec<f64> = traj.points.iter().map(|p| classical_energy(p.phi, p.z, &map.lmg)).collect();
    energy_stddev_of(&e)
}

/// Spread of `H0` over `n_iter` iterates starting at `(phi, z)`.
pub fn stroboscopic_stddev(map: &StroboscopicMap, phi: f64, z: f64, n_iter: usize) -> Result<f64> {
    let mut e = Vec::with_capacity(n_iter + 1);
    let (mut p, mut q) = (phi, z);
    e.push(classical_energy(p, q, &map.lmg));
    for _ in 0..n_iter {
        (p, q) = map.apply_raw(p, q)?;
        e.push(classical_energy(p, q, &map.lmg));
    }
    Ok(energy_stddev_of(&e))
}

/// True when the orbit from `(phi, z)` stays locked to the resonance for `n_iter` steps.
///
/// Locked orbits advance by `2 pi s / r` per step on average; a deviation of a full turn
/// from that rate means the orbit circulates outside the island chain.
pub fn is_locked(map: &StroboscopicMap, res: Resonance, phi: f64, z: f64, n_iter: usize) -> Result<bool> {
    let rate = 2.0 * PI * res.s as f64 / res.r as f64;
    let (mut p, mut q) = (phi, z);
    for n in 1..=n_iter {
        (p, q) = map.apply_raw(p, q)?;
        if (p - phi - n as f64 * rate).abs() > 2.0 * PI {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bisect between a locked and a circulating start on the scan line.
fn refine_crossing(
    map: &StroboscopicMap,
    res: Resonance,
    phi: f64,
    (mut a, mut b): (f64, f64),
    cfg: &ScanConfig,
) -> Result<f64> {
    let la = is_locked(map, res, phi, a, cfg.n_iter)?;
    let lb = is_locked(map, res, phi, b, cfg.n_iter)?;
    if la == lb {
        return Err(Error::IslandNotFound(format!(
            "energy-spread jump in [{a}, {b}] does not separate locked from circulating orbits"
        )));
    }
    while (b - a).abs() > cfg.z_tol {
        let mid = 0.5 * (a + b);
        if is_locked(map, res, phi, mid, cfg.n_iter)? == la {
            a = mid;
        } else {
            b = mid;
        }
    }
    // report the last locked point, so the crossing lies on the island side
    Ok(if la { a } else { b })
}

fn validate(z_range: (f64, f64), cfg: &ScanConfig) -> Result<()> {
    let (lo, hi) = z_range;
    if !(lo < hi) || lo < -1.0 || hi > 1.0 {
        return Err(Error::InvalidParameter(format!("scan range [{lo}, {hi}] must be ordered inside [-1, 1]")));
    }
    if cfg.n_grid < 100 {
        return Err(Error::InvalidParameter(format!("n_grid = {} below 100", cfg.n_grid)));
    }
    Ok(())
}

/// Energy spread on a uniform grid of `z` along `phi = phi_line`.
pub fn energy_spread_profile(
    phi_line: f64,
    z_range: (f64, f64),
    cfg: &ScanConfig,
    map: &StroboscopicMap,
) -> Result<(Vec<f64>, Vec<f64>)> {
    validate(z_range, cfg)?;
    let (lo, hi) = z_range;
    let z_grid: Vec<f64> =
        (0..cfg.n_grid).map(|i| lo + (hi - lo) * i as f64 / (cfg.n_grid - 1) as f64).collect();
    let stddev = z_grid
        .par_iter()
        .map(|&z| stroboscopic_stddev(map, phi_line, z, cfg.n_iter))
        .collect::<Result<Vec<f64>>>()?;
    Ok((z_grid, stddev))
}

/// Grid intervals `(i_lo, i_hi)` holding the two largest jumps of the energy spread.
pub fn locate_jumps(stddev: &[f64], cfg: &ScanConfig) -> Result<(usize, usize)> {
    let jumps: Vec<f64> = stddev.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut sorted = jumps.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let threshold = (cfg.jump_factor * sorted[sorted.len() / 2]).max(cfg.min_jump);
    let mut candidates: Vec<usize> = (0..jumps.len()).filter(|&i| jumps[i] > threshold).collect();
    candidates.sort_by(|&a, &b| jumps[b].total_cmp(&jumps[a]));
    if candidates.len() < 2 {
        return Err(Error::IslandNotFound(format!(
            "{} energy-spread jumps above threshold {threshold:e}",
            candidates.len()
        )));
    }
    Ok((candidates[0].min(candidates[1]), candidates[0].max(candidates[1])))
}

/// Scan `z` along `phi = phi_line`, locate the two separatrix crossings by the jumps of the
/// energy spread, refine them by bisection and locate the stable period-`r` point between.
pub fn scan_separatrix(
    phi_line: f64,
    z_range: (f64, f64),
    cfg: &ScanConfig,
    map: &StroboscopicMap,
    res: Resonance,
) -> Result<SeparatrixScan> {
    let (z_grid, stddev) = energy_spread_profile(phi_line, z_range, cfg, map)?;
    let (i_lo, i_hi) = locate_jumps(&stddev, cfg)?;
    let z_lower = refine_crossing(map, res, phi_line, (z_grid[i_lo + 1], z_grid[i_lo]), cfg)?;
    let z_upper = refine_crossing(map, res, phi_line, (z_grid[i_hi], z_grid[i_hi + 1]), cfg)?;

    let i_min = (i_lo + 1..=i_hi)
        .min_by(|&a, &b| stddev[a].total_cmp(&stddev[b]))
        .ok_or_else(|| Error::IslandNotFound("no grid point inside the island".into()))?;
    let fixed_point = locate_fixed_point(PhasePoint::new(phi_line, z_grid[i_min])?, res, map, &Default::default())?;
    let z_fixed = fixed_point.z;
    if !(z_lower < z_fixed && z_fixed < z_upper) {
        return Err(Error::IslandNotFound(format!(
            "fixed point z = {z_fixed} outside the crossings [{z_lower}, {z_upper}]"
        )));
    }
    Ok(SeparatrixScan { phi_line, z_grid, stddev, z_lower, z_upper, z_fixed, fixed_point })
}
