//! Effective pendulum of an `r:s` island chain from the classical stroboscopic map:
//! energy-spread scans locate the separatrix, branch tracing gives the areas `S+` and
//! `S-`, and the monodromy matrix at the island centre fixes the mass.

pub mod fixed_point;
pub mod geometry;
pub mod pendulum;
pub mod scan;

use std::f64::consts::PI;

use log::debug;
use serde::{Deserialize, Serialize};

pub use fixed_point::{locate_fixed_point, monodromy, monodromy_matrix, MonodromyResult, NewtonConfig, DEFAULT_FD_STEP};
pub use geometry::{trace_separatrix_branches, IslandGeometry, TraceConfig};
pub use pendulum::{
    epsilon_max, harmonic_splitting, pendulum_levels, pendulum_params, rat_splitting, PendulumParams, PowerLaw,
};
pub use scan::{energy_spread_profile, energy_stddev, locate_jumps, scan_separatrix, ScanConfig, SeparatrixScan};

use crate::classical::{find_resonant_energy, z_on_contour, StroboscopicMap};
use crate::error::{Error, Result};
use crate::params::Resonance;

/// Where the scan line sits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanLine {
    /// Through the stable centre, `phi = pi`.
    #[default]
    Centre,
    /// `phi = pi / r`.
    PiOverR,
    Fixed(f64),
}

impl ScanLine {
    pub fn angle(&self, r: u32) -> f64 {
        match *self {
            ScanLine::Centre => PI,
            ScanLine::PiOverR => PI / r as f64,
            ScanLine::Fixed(phi) => phi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub scan_line: ScanLine,
    /// Half-width of the initial `z` window around the resonant torus.
    pub z_half_width: f64,
    /// Rescans allowed when the island is missed or spans too few grid points.
    pub window_refinements: usize,
    pub scan: ScanConfig,
    pub trace: TraceConfig,
    pub fd_step: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            scan_line: ScanLine::default(),
            z_half_width: 0.25,
            window_refinements: 4,
            scan: ScanConfig::default(),
            trace: TraceConfig::default(),
            fd_step: DEFAULT_FD_STEP,
        }
    }
}

/// Every intermediate of one extraction, kept for reporting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Extraction {
    pub resonant_energy: f64,
    pub scan: SeparatrixScan,
    pub geometry: IslandGeometry,
    pub monodromy: MonodromyResult,
    pub pendulum: PendulumParams,
}

/// Scan window centred on the unperturbed resonant torus at the scan angle.
pub fn default_scan_window(map: &StroboscopicMap, res: Resonance, phi_line: f64, half_width: f64) -> Result<(f64, f64, f64)> {
    let period = res.r as f64 * map.kick.tau / res.s as f64;
    let e_r = find_resonant_energy(period, &map.lmg, crate::classical::period::DEFAULT_QUAD_TOL)?;
    let z_r = z_on_contour(phi_line, e_r, &map.lmg)
        .ok_or_else(|| Error::IslandNotFound(format!("resonant torus does not cross phi = {phi_line}")))?;
    Ok((e_r, (z_r - half_width).max(-1.0), (z_r + half_width).min(1.0)))
}

/// Fewest grid points an island must span before the scan is accepted.
const MIN_ISLAND_POINTS: f64 = 20.0;

/// Scan with a window adapted to the island size: shrink the window when no island is
/// found, zoom onto the island when it is resolved by too few grid points.
///
/// Windows are chosen with short probe scans; the final scan uses the full settings.
pub fn adaptive_scan(map: &StroboscopicMap, res: Resonance, cfg: &ExtractionConfig) -> Result<(f64, SeparatrixScan)> {
    let phi_line = cfg.scan_line.angle(res.r);
    let (resonant_energy, lo, hi) = default_scan_window(map, res, phi_line, cfg.z_half_width)?;
    let probe = ScanConfig { n_iter: (cfg.scan.n_iter / 4).max(200).min(cfg.scan.n_iter), ..cfg.scan };
    let mut centre = 0.5 * (lo + hi);
    let mut half = 0.5 * (hi - lo);
    let mut window = (lo, hi);
    for attempt in 0..=cfg.window_refinements {
        window = ((centre - half).max(-1.0), (centre + half).min(1.0));
        let (z_grid, stddev) = energy_spread_profile(phi_line, window, &probe, map)?;
        match locate_jumps(&stddev, &probe) {
            Ok((i_lo, i_hi)) => {
                let width = z_grid[i_hi + 1] - z_grid[i_lo];
                debug!("probe window [{:.6}, {:.6}]: island width about {width:.3e}", window.0, window.1);
                if (i_hi - i_lo) as f64 >= MIN_ISLAND_POINTS || attempt == cfg.window_refinements {
                    break;
                }
                centre = 0.5 * (z_grid[i_hi + 1] + z_grid[i_lo]);
                half = 1.5 * width;
            }
            Err(Error::IslandNotFound(msg)) => {
                debug!("probe window [{:.6}, {:.6}]: {msg}", window.0, window.1);
                if attempt == cfg.window_refinements {
                    return Err(Error::IslandNotFound(msg));
                }
                half /= 5.0;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((resonant_energy, scan_separatrix(phi_line, window, &cfg.scan, map, res)?))
}

/// Full pipeline: scan, trace, monodromy, pendulum parameters.
pub fn extract(map: &StroboscopicMap, res: Resonance, cfg: &ExtractionConfig) -> Result<Extraction> {
    let (resonant_energy, scan) = adaptive_scan(map, res, cfg)?;
    let geometry = trace_separatrix_branches(&scan, &cfg.trace, map, res)?;
    let monodromy = monodromy(scan.fixed_point, res.r, cfg.fd_step, map)?;
    let pendulum = pendulum_params(&geometry, &monodromy, res, map.kick.tau, map.kick.epsilon)?;
    Ok(Extraction { resonant_energy, scan, geometry, monodromy, pendulum })
}
