use std::f64::consts::PI;

use log::debug;
use serde::{Deserialize, Serialize};

use super::fixed_point::periodic_orbit;
use super::scan::SeparatrixScan;
use crate::classical::{fold_angle, PhasePoint, StroboscopicMap};
use crate::error::{Error, Result};
use crate::params::Resonance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    /// Launch offset in `z` outside the crossing.
    pub delta: f64,
    pub n_iter: usize,
    pub n_bins: usize,
    pub min_coverage: f64,
    /// Retries with `delta` doubled each time.
    pub retries: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { delta: 1e-5, n_iter: 20_000, n_bins: 512, min_coverage: 0.95, retries: 4 }
    }
}

/// Separatrix branches of an island chain and the areas beneath them (baseline `z = -1`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IslandGeometry {
    pub upper_branch: Vec<PhasePoint>,
    pub lower_branch: Vec<PhasePoint>,
    pub s_plus: f64,
    pub s_minus: f64,
    pub fixed_points: Vec<PhasePoint>,
    /// Launch offset that succeeded.
    pub delta: f64,
}

impl IslandGeometry {
    /// Area of the whole island chain.
    pub fn island_area(&self) -> f64 {
        self.s_plus - self.s_minus
    }
}

/// Per-bin extremal points of an orbit, ordered in `phi`. `upper` keeps the lowest point
/// of each bin (the envelope facing an island below), otherwise the highest.
fn envelope(map: &StroboscopicMap, seed: PhasePoint, upper: bool, cfg: &TraceConfig) -> Result<(Vec<PhasePoint>, f64)> {
    let mut bins: Vec<Option<PhasePoint>> = vec![None; cfg.n_bins];
    let width = 2.0 * PI / cfg.n_bins as f64;
    let mut p = seed;
    for _ in 0..=cfg.n_iter {
        if p.z.abs() >= 1.0 {
            return Err(Error::TracingFailed(format!("branch reached the pole from {seed:?}")));
        }
        let phi = fold_angle(p.phi);
        let k = ((phi / width) as usize).min(cfg.n_bins - 1);
        let keep = match bins[k] {
            None => true,
            Some(q) => (upper && p.z < q.z) || (!upper && p.z > q.z),
        };
        if keep {
            bins[k] = Some(PhasePoint { phi, z: p.z });
        }
        p = map.apply(p)?;
    }
    let pts: Vec<PhasePoint> = bins.into_iter().flatten().collect();
    let coverage = pts.len() as f64 / cfg.n_bins as f64;
    Ok((pts, coverage))
}

/// Periodic trapezoidal integral of `(z + 1) dphi` through points sorted in `phi`.
pub fn area_below(points: &[PhasePoint]) -> f64 {
    let n = points.len();
    if n == 0 {
        return 0.0;
    }
    let mut area = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let mut dphi = b.phi - a.phi;
        if i + 1 == n {
            dphi += 2.0 * PI;
        }
        area += 0.5 * dphi * (a.z + b.z + 2.0);
    }
    area
}

fn trace_once(scan: &SeparatrixScan, delta: f64, cfg: &TraceConfig, map: &StroboscopicMap) -> Result<(Vec<PhasePoint>, Vec<PhasePoint>)> {
    let up_seed = PhasePoint::new(scan.phi_line, (scan.z_upper + delta).min(1.0))?;
    let lo_seed = PhasePoint::new(scan.phi_line, (scan.z_lower - delta).max(-1.0))?;
    let (upper, cov_u) = envelope(map, up_seed, true, cfg)?;
    let (lower, cov_l) = envelope(map, lo_seed, false, cfg)?;
    if cov_u < cfg.min_coverage || cov_l < cfg.min_coverage {
        return Err(Error::TracingFailed(format!(
            "bin coverage {cov_u:.3} (upper) / {cov_l:.3} (lower) below {}",
            cfg.min_coverage
        )));
    }
    // an orbit launched in the chaotic layer can cross to the far side of the island
    let width = 2.0 * PI / cfg.n_bins as f64;
    let fp_bin = (fold_angle(scan.fixed_point.phi) / width) as usize;
    let near = |pts: &[PhasePoint]| {
        pts.iter().filter(|p| ((p.phi / width) as usize).abs_diff(fp_bin) <= 1).map(|p| p.z).collect::<Vec<_>>()
    };
    if near(&upper).iter().any(|&z| z < scan.z_fixed) || near(&lower).iter().any(|&z| z > scan.z_fixed) {
        return Err(Error::TracingFailed("a branch orbit crossed the island centre".into()));
    }
    let (s_plus, s_minus) = (area_below(&upper), area_below(&lower));
    if !(s_plus > s_minus && s_minus >= 0.0) {
        return Err(Error::TracingFailed(format!("areas S+ = {s_plus}, S- = {s_minus} out of order")));
    }
    Ok((upper, lower))
}

/// Trace both separatrix branches from just outside the scan crossings and integrate the
/// areas beneath them. For `r > 1` each branch spans the whole island chain.
pub fn trace_separatrix_branches(
    scan: &SeparatrixScan,
    cfg: &TraceConfig,
    map: &StroboscopicMap,
    res: Resonance,
) -> Result<IslandGeometry> {
    if !(cfg.delta > 0.0) || cfg.n_bins < 8 {
        return Err(Error::InvalidParameter("trace needs delta > 0 and at least 8 bins".into()));
    }
    let mut delta = cfg.delta;
    let mut attempt = 0;
    loop {
        match trace_once(scan, delta, cfg, map) {
            Ok((upper, lower)) => {
                let (s_plus, s_minus) = (area_below(&upper), area_below(&lower));
                let fixed_points = periodic_orbit(scan.fixed_point, res, map)?;
                return Ok(IslandGeometry { upper_branch: upper, lower_branch: lower, s_plus, s_minus, fixed_points, delta });
            }
            Err(Error::TracingFailed(msg)) if attempt < cfg.retries => {
                debug!("tracing failed at delta = {delta:e} ({msg}); retrying");
                delta *= 2.0;
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}
