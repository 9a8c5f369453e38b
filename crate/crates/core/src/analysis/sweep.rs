//! Sweeps over kick strength and spin size, and the join of quantum splittings with the
//! pendulum predictions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{loglog_fit, PowerLawFit};
use crate::classical::StroboscopicMap;
use crate::error::{Error, Result};
use crate::extraction::{epsilon_max, extract, ExtractionConfig, PendulumParams};
use crate::floquet::{diagonalize_floquet, quasienergy_splitting, FloquetBuilder, PairTracker, TrackingMode, DEFAULT_OVERLAP_FLOOR};
use crate::params::{Kick, Lmg, Resonance, Spin};
use crate::quantum::{build_spin_matrices, ResonanceSpec, StaticSpectrum};

/// Relative disagreement between the two `eps_max` estimates that triggers a diagnostic.
pub const CROSSING_DISCREPANCY: f64 = 0.5;

/// `n` points per decade from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi >= lo) || per_decade == 0 {
        return Err(Error::InvalidParameter(format!("bad log grid [{lo}, {hi}] x {per_decade}")));
    }
    let n = ((hi / lo).log10() * per_decade as f64).round() as usize;
    if n == 0 {
        return Ok(vec![lo]);
    }
    Ok((0..=n).map(|i| lo * (hi / lo).powf(i as f64 / n as f64)).collect())
}

pub fn check_grid(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidParameter("empty kick-strength grid".into()));
    }
    if eps_grid.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
        return Err(Error::InvalidParameter("kick strengths must be finite and >= 0".into()));
    }
    if eps_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("kick-strength grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Island geometry and pendulum parameters at one kick strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IslandSummary {
    pub s_plus: f64,
    pub s_minus: f64,
    pub trace: f64,
    pub det: f64,
    pub pendulum: PendulumParams,
}

impl IslandSummary {
    pub fn area(&self) -> f64 {
        self.s_plus - self.s_minus
    }
}

/// Classical pipeline result at one kick strength; failures are kept as gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPoint {
    pub epsilon: f64,
    pub summary: Option<IslandSummary>,
    pub error: Option<String>,
}

/// Extraction with the kick strength of `base` replaced by `epsilon`.
pub fn classical_point(base: &StroboscopicMap, res: Resonance, epsilon: f64, cfg: &ExtractionConfig) -> ClassicalPoint {
    let run = || -> Result<IslandSummary> {
        let map = StroboscopicMap { kick: Kick::new(base.kick.tau, epsilon)?, ..*base };
        let ex = extract(&map, res, cfg)?;
        Ok(IslandSummary {
            s_plus: ex.geometry.s_plus,
            s_minus: ex.geometry.s_minus,
            trace: ex.monodromy.trace,
            det: ex.monodromy.det,
            pendulum: ex.pendulum,
        })
    };
    match run() {
        Ok(s) => ClassicalPoint { epsilon, summary: Some(s), error: None },
        Err(e) => ClassicalPoint { epsilon, summary: None, error: Some(e.to_string()) },
    }
}

/// Classical extraction over a kick-strength grid, one independent task per point.
pub fn classical_table(
    base: &StroboscopicMap,
    res: Resonance,
    eps_grid: &[f64],
    cfg: &ExtractionConfig,
) -> Result<Vec<ClassicalPoint>> {
    check_grid(eps_grid)?;
    Ok(eps_grid.par_iter().map(|&e| classical_point(base, res, e, cfg)).collect())
}

fn successful(points: &[ClassicalPoint]) -> Vec<(f64, IslandSummary)> {
    points
        .iter()
        .filter(|p| p.epsilon > 0.0)
        .filter_map(|p| p.summary.map(|s| (p.epsilon, s)))
        .collect()
}

/// Power law `K(eps)` and the mean pendulum mass over the successful points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingFit {
    pub resonance: Resonance,
    pub coupling: PowerLawFit,
    pub mass: f64,
    /// Relative standard deviation of the mass across the fitted points.
    pub mass_spread: f64,
}

impl CouplingFit {
    pub fn coupling_at(&self, epsilon: f64) -> f64 {
        if epsilon == 0.0 {
            0.0
        } else {
            self.coupling.power_law().eval(epsilon)
        }
    }

    /// Scaled splitting `2|K|` predicted by resonance-assisted tunneling.
    pub fn rat_scaled(&self, epsilon: f64) -> f64 {
        2.0 * self.coupling_at(epsilon).abs()
    }

    /// Scaled harmonic splitting `hbar r sqrt(2|K|/m)`.
    pub fn harmonic_scaled(&self, epsilon: f64, hbar_eff: f64) -> f64 {
        hbar_eff * self.resonance.r as f64 * (2.0 * self.coupling_at(epsilon).abs() / self.mass).sqrt()
    }

    pub fn epsilon_max(&self, hbar_eff: f64) -> Result<f64> {
        epsilon_max(&self.coupling.power_law(), self.mass, self.resonance.r, hbar_eff)
    }
}

pub fn fit_coupling(points: &[ClassicalPoint], resonance: Resonance) -> Result<CouplingFit> {
    let ok = successful(points);
    let eps: Vec<f64> = ok.iter().map(|p| p.0).collect();
    let k: Vec<f64> = ok.iter().map(|p| p.1.pendulum.k_rs.abs()).collect();
    let coupling = loglog_fit(&eps, &k)?;
    let masses: Vec<f64> = ok.iter().map(|p| p.1.pendulum.m_rs).collect();
    let n = masses.len() as f64;
    let mass = masses.iter().sum::<f64>() / n;
    let var = masses.iter().map(|m| (m - mass).powi(2)).sum::<f64>() / n;
    Ok(CouplingFit { resonance, coupling, mass, mass_spread: var.sqrt() / mass.abs() })
}

/// Island area `S+ - S-` against kick strength.
pub fn fit_area(points: &[ClassicalPoint]) -> Result<PowerLawFit> {
    let ok = successful(points);
    let eps: Vec<f64> = ok.iter().map(|p| p.0).collect();
    let area: Vec<f64> = ok.iter().map(|p| p.1.area()).collect();
    loglog_fit(&eps, &area)
}

/// Kick strength where the per-point RAT and harmonic predictions cross, interpolated
/// linearly in `ln eps`. `None` if the sampled range does not bracket the crossing.
pub fn numeric_crossing(points: &[ClassicalPoint], r: u32, hbar_eff: f64) -> Option<f64> {
    let g: Vec<(f64, f64)> = successful(points)
        .into_iter()
        .map(|(e, s)| {
            let p = s.pendulum;
            let rat = 2.0 * p.k_rs.abs();
            let harm = hbar_eff * r as f64 * (2.0 * p.k_rs.abs() / p.m_rs).sqrt();
            (e.ln(), (rat / harm).ln())
        })
        .collect();
    g.windows(2).find(|w| w[0].1 < 0.0 && w[1].1 >= 0.0).map(|w| {
        let t = -w[0].1 / (w[1].1 - w[0].1);
        (w[0].0 + t * (w[1].0 - w[0].0)).exp()
    })
}

/// `eps_max(J)` from the coupling fit and its power law in `J`.
pub fn scaling_epsilon_max(coupling: &CouplingFit, j_list: &[f64]) -> Result<(Vec<f64>, PowerLawFit)> {
    let eps: Vec<f64> = j_list.iter().map(|j| coupling.epsilon_max(1.0 / j)).collect::<Result<_>>()?;
    let fit = loglog_fit(j_list, &eps)?;
    Ok((eps, fit))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumSweepConfig {
    pub tracking: TrackingMode,
    pub overlap_floor: f64,
}

impl Default for QuantumSweepConfig {
    fn default() -> Self {
        Self { tracking: TrackingMode::Continuation, overlap_floor: DEFAULT_OVERLAP_FLOOR }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumPoint {
    pub epsilon: f64,
    pub delta_phi: Option<f64>,
    /// `delta_phi / (J tau)`.
    pub scaled: Option<f64>,
    /// Smaller of the two overlaps that identified the pair.
    pub overlap: Option<f64>,
    pub error: Option<String>,
}

/// Resonant-pair splittings along an increasing kick-strength grid at fixed `tau_q`.
///
/// A point whose pair cannot be identified becomes a gap and the tracker restarts from
/// the unperturbed pair.
pub fn quantum_sweep(
    builder: &FloquetBuilder<'_>,
    spectrum: &StaticSpectrum,
    res: &ResonanceSpec,
    eps_grid: &[f64],
    cfg: &QuantumSweepConfig,
) -> Result<Vec<QuantumPoint>> {
    check_grid(eps_grid)?;
    let j = spectrum.spin.j();
    let free = builder.free_evolution(res.tau_q);
    let mut tracker = PairTracker::new(cfg.tracking, cfg.overlap_floor);
    let mut out = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let pair = builder
            .build_with_free(&free, res.tau_q, eps)
            .and_then(|f| diagonalize_floquet(&f))
            .and_then(|qs| tracker.next(&qs, spectrum, res.lower, res.upper));
        out.push(match pair {
            Ok(p) => {
                let (d, scaled) = quasienergy_splitting(&p, res.resonance.r, j, res.tau_q);
                QuantumPoint {
                    epsilon: eps,
                    delta_phi: Some(d),
                    scaled: Some(scaled),
                    overlap: Some(p.overlap_a.min(p.overlap_b)),
                    error: None,
                }
            }
            Err(e) => {
                tracker.reset();
                QuantumPoint { epsilon: eps, delta_phi: None, scaled: None, overlap: None, error: Some(e.to_string()) }
            }
        });
    }
    Ok(out)
}

/// One joined row: all three splittings, or a gap marker naming the failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingRow {
    pub epsilon: f64,
    pub quantum_scaled: Option<f64>,
    pub rat_scaled: f64,
    pub harmonic_scaled: f64,
    pub k_rs: f64,
    pub m_rs: f64,
    pub gap: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingCurve {
    pub j: f64,
    pub resonance: Resonance,
    pub tau_q: f64,
    pub rows: Vec<SplittingRow>,
    /// From inverting the coupling fit.
    pub epsilon_max_estimate: Option<f64>,
    /// Crossing of the per-point RAT and harmonic predictions.
    pub epsilon_max_crossing: Option<f64>,
    pub diagnostic: Option<String>,
}

/// Join quantum points with the pendulum predictions of `coupling`.
pub fn join_curve(
    j: f64,
    res: &ResonanceSpec,
    quantum: &[QuantumPoint],
    coupling: &CouplingFit,
    classical: &[ClassicalPoint],
) -> SplittingCurve {
    let hbar = 1.0 / j;
    let rows = quantum
        .iter()
        .map(|q| SplittingRow {
            epsilon: q.epsilon,
            quantum_scaled: q.scaled,
            rat_scaled: coupling.rat_scaled(q.epsilon),
            harmonic_scaled: coupling.harmonic_scaled(q.epsilon, hbar),
            k_rs: coupling.coupling_at(q.epsilon),
            m_rs: coupling.mass,
            gap: q.error.clone(),
        })
        .collect();
    let estimate = coupling.epsilon_max(hbar).ok();
    let crossing = numeric_crossing(classical, res.resonance.r, hbar);
    let diagnostic = match (estimate, crossing) {
        (Some(a), Some(b)) if (a - b).abs() > CROSSING_DISCREPANCY * a.min(b) => Some(format!(
            "eps_max estimates disagree: fit inversion {a:.4e}, crossing {b:.4e}"
        )),
        (Some(_), None) => Some("sampled kick strengths do not bracket the RAT/harmonic crossing".into()),
        (None, _) => Some("coupling fit cannot be inverted".into()),
        _ => None,
    };
    SplittingCurve {
        j,
        resonance: res.resonance,
        tau_q: res.tau_q,
        rows,
        epsilon_max_estimate: estimate,
        epsilon_max_crossing: crossing,
        diagnostic,
    }
}

/// Quantum sweep at one spin size joined with the classical predictions.
pub fn splitting_curve(
    spectrum: &StaticSpectrum,
    res: &ResonanceSpec,
    eps_grid: &[f64],
    coupling: &CouplingFit,
    classical: &[ClassicalPoint],
    cfg: &QuantumSweepConfig,
) -> Result<SplittingCurve> {
    let ops = build_spin_matrices(spectrum.spin);
    let builder = FloquetBuilder::new(spectrum, &ops)?;
    let quantum = quantum_sweep(&builder, spectrum, res, eps_grid, cfg)?;
    Ok(join_curve(spectrum.spin.j(), res, &quantum, coupling, classical))
}

/// Splitting curves for every spin size; the classical side is shared because it does
/// not depend on `J`.
#[allow(clippy::too_many_arguments)]
pub fn sweep_splitting(
    j_list: &[f64],
    lmg: Lmg,
    resonance: Resonance,
    e_r: f64,
    eps_grid: &[f64],
    coupling: &CouplingFit,
    classical: &[ClassicalPoint],
    cfg: &QuantumSweepConfig,
) -> Result<Vec<SplittingCurve>> {
    if j_list.is_empty() {
        return Err(Error::InvalidParameter("empty spin-size list".into()));
    }
    check_grid(eps_grid)?;
    j_list
        .par_iter()
        .map(|&j| {
            let spectrum = StaticSpectrum::compute(Spin::new(j)?, lmg)?;
            let res = ResonanceSpec::resolve(&spectrum, resonance, e_r)?;
            splitting_curve(&spectrum, &res, eps_grid, coupling, classical, cfg)
        })
        .collect()
}
