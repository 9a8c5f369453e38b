//! Floquet operator `U = exp(-i tau H0) exp(-i eps Jx)`, its quasienergies, and the
//! resonant pair of Floquet states.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complex_schur, symmetric_eigen, unitarity_defect};
use crate::quantum::{ResonanceSpec, SpinOperators, StaticSpectrum};

pub const UNITARITY_TOL: f64 = 1e-10;
pub const MODULUS_TOL: f64 = 1e-8;
pub const DEFAULT_OVERLAP_FLOOR: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct FloquetOperator {
    pub u: Array2<Complex64>,
    pub tau: f64,
    pub epsilon: f64,
}

/// `V diag(exp(-i t w)) V^T` for a real orthogonal `V`, returned as (real, imaginary) parts.
fn real_spectral_exp(vecs: &Array2<f64>, vals: ArrayView1<f64>, t: f64) -> (Array2<f64>, Array2<f64>) {
    let mut vc = vecs.clone();
    let mut vs = vecs.clone();
    for (k, &w) in vals.iter().enumerate() {
        let (s, c) = (t * w).sin_cos();
        vc.column_mut(k).mapv_inplace(|x| x * c);
        vs.column_mut(k).mapv_inplace(|x| -x * s);
    }
    (vc.dot(&vecs.t()), vs.dot(&vecs.t()))
}

fn combine(re: &Array2<f64>, im: &Array2<f64>) -> Array2<Complex64> {
    let mut out = Array2::zeros(re.raw_dim());
    ndarray::Zip::from(&mut out)
        .and(re)
        .and(im)
        .for_each(|o, &a, &b| *o = Complex64::new(a, b));
    out
}

/// Reusable factors for building Floquet operators at one spin size.
///
/// Holds the eigen-decomposition of `Jx`, computed once; both exponentials are formed
/// spectrally from real orthogonal eigenbases.
#[derive(Debug, Clone)]
pub struct FloquetBuilder<'a> {
    spectrum: &'a StaticSpectrum,
    jx_vals: Array1<f64>,
    jx_vecs: Array2<f64>,
}

impl<'a> FloquetBuilder<'a> {
    pub fn new(spectrum: &'a StaticSpectrum, ops: &SpinOperators) -> Result<Self> {
        if ops.dim() != spectrum.dim() {
            return Err(Error::InvalidParameter("operator and spectrum dimensions differ".into()));
        }
        let (jx_vals, jx_vecs) = symmetric_eigen(&ops.jx)?;
        Ok(Self { spectrum, jx_vals, jx_vecs })
    }

    /// `exp(-i tau H0)` as (real, imaginary) parts.
    pub fn free_evolution(&self, tau: f64) -> (Array2<f64>, Array2<f64>) {
        let energies = Array1::from(self.spectrum.energies.clone());
        real_spectral_exp(&self.spectrum.states, energies.view(), tau)
    }

    /// `exp(-i eps Jx)` as (real, imaginary) parts.
    pub fn kick(&self, epsilon: f64) -> (Array2<f64>, Array2<f64>) {
        real_spectral_exp(&self.jx_vecs, self.jx_vals.view(), epsilon)
    }

    pub fn build(&self, tau: f64, epsilon: f64) -> Result<FloquetOperator> {
        let free = self.free_evolution(tau);
        self.build_with_free(&free, tau, epsilon)
    }

    /// Build with a precomputed `exp(-i tau H0)`; used by sweeps at fixed `tau`.
    pub fn build_with_free(
        &self,
        free: &(Array2<f64>, Array2<f64>),
        tau: f64,
        epsilon: f64,
    ) -> Result<FloquetOperator> {
        if !(tau >= 0.0) || !(epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Floquet operator needs tau >= 0 and eps >= 0 (got {tau}, {epsilon})"
            )));
        }
        let (ar, ai) = free;
        let (br, bi) = self.kick(epsilon);
        let re = ar.dot(&br) - ai.dot(&bi);
        let im = ar.dot(&bi) + ai.dot(&br);
        Ok(FloquetOperator { u: combine(&re, &im), tau, epsilon })
    }
}

/// Convenience wrapper building the operator in one call.
pub fn build_floquet(
    spectrum: &StaticSpectrum,
    ops: &SpinOperators,
    tau: f64,
    epsilon: f64,
) -> Result<FloquetOperator> {
    FloquetBuilder::new(spectrum, ops)?.build(tau, epsilon)
}

/// Quasienergies `phi_k` in `[0, 2 pi)` with `U |f_k> = exp(-i phi_k) |f_k>`.
#[derive(Debug, Clone)]
pub struct QuasiSpectrum {
    pub phases: Vec<f64>,
    /// Eigenvectors as columns in the `Jz` basis.
    pub states: Array2<Complex64>,
}

pub fn fold_phase(phi: f64) -> f64 {
    let f = phi.rem_euclid(2.0 * PI);
    if f >= 2.0 * PI {
        0.0
    } else {
        f
    }
}

/// Distance between two phases on the circle, in `[0, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Phase distance modulo `2 pi / r`.
///
/// Floquet states localised on an `r`-island chain come in multiplets whose phases are
/// spaced by `2 pi / r`, so for an `r:s` pair only this reduced distance is meaningful.
/// For `r = 1` it is the plain circular distance.
pub fn chain_distance(a: f64, b: f64, r: u32) -> f64 {
    let period = 2.0 * PI / r.max(1) as f64;
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

pub fn diagonalize_floquet(f: &FloquetOperator) -> Result<QuasiSpectrum> {
    let defect = unitarity_defect(&f.u);
    if defect > UNITARITY_TOL {
        return Err(Error::Contract(format!(
            "Floquet operator not unitary: |U^dag U - I|_max = {defect:e}"
        )));
    }
    let (eigs, states, off) = complex_schur(&f.u)?;
    if off > 1e-8 {
        return Err(Error::Contract(format!(
            "Schur form of a unitary matrix should be diagonal (off-diagonal {off:e})"
        )));
    }
    let mut phases = Vec::with_capacity(eigs.len());
    for z in eigs.iter() {
        if (z.norm() - 1.0).abs() > MODULUS_TOL {
            return Err(Error::Contract(format!("eigenvalue modulus {} not 1", z.norm())));
        }
        phases.push(fold_phase(-z.arg()));
    }
    Ok(QuasiSpectrum { phases, states })
}

/// The two Floquet states continuously connected to the resonant unperturbed pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonantPair {
    pub idx_a: usize,
    pub idx_b: usize,
    /// Weight of each state on the reference two-dimensional subspace.
    pub overlap_a: f64,
    pub overlap_b: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub delta_phi: f64,
    #[serde(skip)]
    pub state_a: Array1<Complex64>,
    #[serde(skip)]
    pub state_b: Array1<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TrackingMode {
    /// Project onto the unperturbed pair `{|E_lower>, |E_upper>}` at every kick strength.
    #[default]
    Projection,
    /// Project onto the pair found at the previous kick strength.
    Continuation,
}

/// Weights `sum_i |<ref_i|f_j>|^2` of every Floquet state on the reference subspace.
fn subspace_weights(qs: &QuasiSpectrum, refs: &[Array1<Complex64>]) -> Vec<f64> {
    let n = qs.phases.len();
    let mut w = vec![0.0; n];
    for r in refs {
        let rc = r.mapv(|z| z.conj());
        let amps = rc.dot(&qs.states);
        for (wj, a) in w.iter_mut().zip(amps.iter()) {
            *wj += a.norm_sqr();
        }
    }
    w
}

/// Pick the two Floquet states with largest weight on the span of `refs`.
pub fn select_pair(qs: &QuasiSpectrum, refs: &[Array1<Complex64>], floor: f64) -> Result<ResonantPair> {
    let w = subspace_weights(qs, refs);
    if w.len() < 2 {
        return Err(Error::InvalidParameter("need at least two Floquet states".into()));
    }
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let (i, j) = (order[0], order[1]);
    if w[j] < floor {
        return Err(Error::TrackingLost { overlap: w[j], floor });
    }
    // order the pair by index for a stable labelling
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    let (phi_a, phi_b) = (qs.phases[a], qs.phases[b]);
    Ok(ResonantPair {
        idx_a: a,
        idx_b: b,
        overlap_a: w[a],
        overlap_b: w[b],
        phi_a,
        phi_b,
        delta_phi: circular_distance(phi_a, phi_b),
        state_a: qs.states.column(a).to_owned(),
        state_b: qs.states.column(b).to_owned(),
    })
}

fn unperturbed_pair(spectrum: &StaticSpectrum, lower: usize, upper: usize) -> Result<[Array1<Complex64>; 2]> {
    let n = spectrum.dim();
    for k in [lower, upper] {
        if k >= n {
            return Err(Error::OutOfBounds { index: k, dim: n });
        }
    }
    let col = |k: usize| spectrum.states.column(k).mapv(|x| Complex64::new(x, 0.0));
    Ok([col(lower), col(upper)])
}

/// Select the pair by projection onto the unperturbed levels `lower`, `upper`.
pub fn identify_resonant_pair(
    qs: &QuasiSpectrum,
    spectrum: &StaticSpectrum,
    lower: usize,
    upper: usize,
    floor: f64,
) -> Result<ResonantPair> {
    select_pair(qs, &unperturbed_pair(spectrum, lower, upper)?, floor)
}

/// Follows the resonant pair across an increasing sequence of kick strengths.
#[derive(Debug, Clone)]
pub struct PairTracker {
    pub mode: TrackingMode,
    pub floor: f64,
    previous: Option<[Array1<Complex64>; 2]>,
}

impl PairTracker {
    pub fn new(mode: TrackingMode, floor: f64) -> Self {
        Self { mode, floor, previous: None }
    }

    pub fn next(&mut self, qs: &QuasiSpectrum, spectrum: &StaticSpectrum, lower: usize, upper: usize) -> Result<ResonantPair> {
        let pair = match (&self.mode, &self.previous) {
            (TrackingMode::Continuation, Some(prev)) => select_pair(qs, prev, self.floor)?,
            _ => identify_resonant_pair(qs, spectrum, lower, upper, self.floor)?,
        };
        if self.mode == TrackingMode::Continuation {
            self.previous = Some([pair.state_a.clone(), pair.state_b.clone()]);
        }
        Ok(pair)
    }

    pub fn reset(&mut self) {
        self.previous = None;
    }
}

/// Splitting of an `r:s` pair, reduced modulo `2 pi / r`, and its scaled form
/// `hbar_eff delta_phi / tau = delta_phi / (J tau)`.
pub fn quasienergy_splitting(pair: &ResonantPair, r: u32, j: f64, tau: f64) -> (f64, f64) {
    let d = chain_distance(pair.phi_a, pair.phi_b, r);
    (d, d / (j * tau))
}

/// One-shot: quantum splitting of the resonant pair at a given kick strength.
pub fn resonant_splitting(
    builder: &FloquetBuilder<'_>,
    res: &ResonanceSpec,
    epsilon: f64,
    floor: f64,
) -> Result<ResonantPair> {
    let f = builder.build(res.tau_q, epsilon)?;
    let qs = diagonalize_floquet(&f)?;
    identify_resonant_pair(&qs, builder.spectrum, res.lower, res.upper, floor)
}
