use std::f64::consts::PI;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::spin::SpinOperators;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::params::{Lmg, Resonance, Spin};

/// Tolerance on `|<E_k|P|E_k>| = 1`.
pub const PARITY_TOL: f64 = 1e-8;
/// Relative gap below which consecutive levels are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// `H0 = w0 Jz + gamma_x / (2J - 1) Jx^2` in the `Jz` basis.
pub fn build_h0(ops: &SpinOperators, lmg: &Lmg) -> Result<Array2<f64>> {
    if ops.spin.twice() < 2 {
        return Err(Error::InvalidParameter(
            "H0 needs J >= 1 (coupling divides by 2J - 1)".into(),
        ));
    }
    let coupling = lmg.gamma_x / (2.0 * ops.spin.j() - 1.0);
    let mut h = ops.jx.dot(&ops.jx) * coupling;
    for (i, jz) in ops.jz.iter().enumerate() {
        h[(i, i)] += lmg.omega0 * jz;
    }
    Ok(h)
}

/// Sorted eigen-decomposition of the static Hamiltonian with parity labels.
#[derive(Debug, Clone)]
pub struct StaticSpectrum {
    pub spin: Spin,
    pub lmg: Lmg,
    /// Ascending eigenvalues `E_k`.
    pub energies: Vec<f64>,
    /// Eigenvectors as columns in the `Jz` basis.
    pub states: Array2<f64>,
    /// Parity of each level, `+1` or `-1`.
    pub parities: Vec<i8>,
}

/// Diagonalize `H0` sector by sector of the diagonal parity operator.
///
/// `H0` must commute with the parity operator; each sector is diagonalized separately
/// so that every eigenvector has a definite parity even when levels of opposite parity
/// come close.
pub fn build_static_spectrum(
    h0: &Array2<f64>,
    parity: &Array1<f64>,
    spin: Spin,
    lmg: Lmg,
) -> Result<StaticSpectrum> {
    let n = h0.nrows();
    if h0.ncols() != n || parity.len() != n || spin.dim() != n {
        return Err(Error::InvalidParameter("H0, parity and spin dimensions disagree".into()));
    }
    for &p in parity {
        if (p.abs() - 1.0).abs() > PARITY_TOL {
            return Err(Error::InvalidParameter("parity diagonal entries must be +-1".into()));
        }
    }
    let scale = h0.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
    let even: Vec<usize> = (0..n).filter(|&i| parity[i] > 0.0).collect();
    let odd: Vec<usize> = (0..n).filter(|&i| parity[i] < 0.0).collect();
    for &i in &even {
        for &k in &odd {
            if h0[(i, k)].abs() > 1e-12 * scale {
                return Err(Error::Degeneracy(format!(
                    "H0 does not commute with parity (element ({i},{k}) = {})",
                    h0[(i, k)]
                )));
            }
        }
    }

    let mut levels: Vec<(f64, Array1<f64>)> = Vec::with_capacity(n);
    for sector in [&even, &odd] {
        if sector.is_empty() {
            continue;
        }
        let block = h0.select(Axis(0), sector).select(Axis(1), sector);
        let (vals, vecs) = symmetric_eigen(&block)?;
        for (c, &e) in vals.iter().enumerate() {
            let mut full = Array1::zeros(n);
            for (r, &idx) in sector.iter().enumerate() {
                full[idx] = vecs[(r, c)];
            }
            levels.push((e, full));
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));

    let energies: Vec<f64> = levels.iter().map(|l| l.0).collect();
    let mut states = Array2::zeros((n, n));
    let mut parities = Vec::with_capacity(n);
    for (k, (_, v)) in levels.iter().enumerate() {
        states.column_mut(k).assign(v);
        let expect: f64 = v.iter().zip(parity).map(|(a, p)| a * a * p).sum();
        if (expect.abs() - 1.0).abs() > PARITY_TOL {
            return Err(Error::Degeneracy(format!(
                "level {k} has parity expectation {expect}, not +-1"
            )));
        }
        parities.push(if expect > 0.0 { 1 } else { -1 });
    }

    let e_max = energies.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    for k in 1..n {
        if energies[k] - energies[k - 1] < DEGENERACY_TOL * e_max {
            return Err(Error::Degeneracy(format!(
                "levels {} and {k} are degenerate (gap {:e})",
                k - 1,
                energies[k] - energies[k - 1]
            )));
        }
    }
    if let Some(k) = (1..n).find(|&k| parities[k] == parities[k - 1]) {
        return Err(Error::Degeneracy(format!(
            "parities of levels {} and {k} do not alternate; parameters outside region I",
            k - 1
        )));
    }

    Ok(StaticSpectrum { spin, lmg, energies, states, parities })
}

impl StaticSpectrum {
    /// Build operators, `H0` and its spectrum in one call.
    pub fn compute(spin: Spin, lmg: Lmg) -> Result<Self> {
        let ops = super::spin::build_spin_matrices(spin);
        let h0 = build_h0(&ops, &lmg)?;
        build_static_spectrum(&h0, &ops.parity(), spin, lmg)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energy(&self, k: usize) -> Result<f64> {
        self.energies
            .get(k)
            .copied()
            .ok_or(Error::OutOfBounds { index: k, dim: self.dim() })
    }

    /// Matrix of `<E_a| A |E_b>` for an operator given in the `Jz` basis.
    pub fn in_eigenbasis(&self, op: &Array2<f64>) -> Array2<f64> {
        self.states.t().dot(op).dot(&self.states)
    }
}

/// Quantum period `T_{k,r} = 2 pi / (E_{k+r} - E_k)`.
pub fn quantum_period(spec: &StaticSpectrum, k: usize, r: usize) -> Result<f64> {
    let upper = spec.energy(k + r)?;
    let lower = spec.energy(k)?;
    Ok(2.0 * PI / (upper - lower))
}

/// Index of the level whose scaled energy `E_k / J` is closest to `e_r`; ties go to the
/// smaller index.
pub fn select_resonant_index(spec: &StaticSpectrum, e_r: f64) -> usize {
    let j = spec.spin.j();
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (k, e) in spec.energies.iter().enumerate() {
        let d = (e / j - e_r).abs();
        if d < best_dist {
            best = k;
            best_dist = d;
        }
    }
    best
}

/// Kick period that makes levels `k` and `k + r` exactly degenerate modulo `2 pi` at
/// zero kick strength: `tau = s T_{k,r}`.
pub fn calibrate_tau(spec: &StaticSpectrum, k: usize, r: usize, s: usize) -> Result<f64> {
    Ok(s as f64 * quantum_period(spec, k, r)?)
}

/// The two unperturbed levels coupled by an `r:s` quantum resonance.
///
/// The reference level `k_ref` is the one closest to the classical resonant energy. It is
/// the upper member of the pair, so the same reference level anchors every resonance order:
/// the pair is `(k_ref - r, k_ref)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSpec {
    pub resonance: Resonance,
    /// Classical resonant scaled energy.
    pub e_r: f64,
    /// Reference level closest to `e_r`.
    pub k_ref: usize,
    pub lower: usize,
    pub upper: usize,
    /// Calibrated kick period `s * 2 pi / (E_upper - E_lower)`.
    pub tau_q: f64,
}

impl ResonanceSpec {
    pub fn resolve(spec: &StaticSpectrum, resonance: Resonance, e_r: f64) -> Result<Self> {
        let k_ref = select_resonant_index(spec, e_r);
        let r = resonance.r as usize;
        let lower = k_ref.checked_sub(r).ok_or(Error::OutOfBounds {
            index: k_ref,
            dim: spec.dim(),
        })?;
        let tau_q = calibrate_tau(spec, lower, r, resonance.s as usize)?;
        Ok(Self { resonance, e_r, k_ref, lower, upper: k_ref, tau_q })
    }
}
