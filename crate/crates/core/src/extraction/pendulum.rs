use serde::{Deserialize, Serialize};

use super::fixed_point::MonodromyResult;
use super::geometry::IslandGeometry;
use crate::error::{Error, Result};
use crate::params::Resonance;

/// Effective pendulum `H = (I - I_rs)^2 / (2 m_rs) + 2 K_rs cos(r theta)` of an island chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams {
    pub i_rs: f64,
    pub m_rs: f64,
    pub k_rs: f64,
    pub r: u32,
    pub s: u32,
    pub tau: f64,
    pub epsilon: f64,
}

impl PendulumParams {
    /// Half-width parameter `sqrt(2 m K)`, equal to `(S+ - S-) / 16`.
    pub fn width(&self) -> f64 {
        (2.0 * self.m_rs * self.k_rs).sqrt()
    }

    /// `sqrt(2 K / m)`, the small-oscillation frequency divided by `r`.
    pub fn frequency(&self) -> f64 {
        (2.0 * self.k_rs / self.m_rs).sqrt()
    }
}

/// Pendulum parameters from the separatrix areas and the rotation number of the island
/// centre: `a = (S+ - S-)/16 = sqrt(2mK)`, `b = arccos(tr M / 2)/(r^2 tau) = sqrt(2K/m)`.
pub fn pendulum_params_from(
    s_plus: f64,
    s_minus: f64,
    trace: f64,
    res: Resonance,
    tau: f64,
    epsilon: f64,
) -> Result<PendulumParams> {
    let a = (s_plus - s_minus) / 16.0;
    if !(a > 0.0) {
        return Err(Error::DegenerateIsland);
    }
    if !(trace > -2.0 && trace < 2.0) {
        return Err(Error::ArccosDomain { trace });
    }
    let r = res.r as f64;
    let b = (0.5 * trace).acos() / (r * r * tau);
    Ok(PendulumParams {
        i_rs: (s_plus + s_minus) / (4.0 * std::f64::consts::PI),
        m_rs: a / b,
        k_rs: 0.5 * a * b,
        r: res.r,
        s: res.s,
        tau,
        epsilon,
    })
}

pub fn pendulum_params(
    geom: &IslandGeometry,
    mono: &MonodromyResult,
    res: Resonance,
    tau: f64,
    epsilon: f64,
) -> Result<PendulumParams> {
    pendulum_params_from(geom.s_plus, geom.s_minus, mono.trace, res, tau, epsilon)
}

/// Unperturbed pendulum level `(hbar (n + 1/2) - I_rs)^2 / (2 m_rs)`.
pub fn pendulum_levels(pp: &PendulumParams, hbar_eff: f64, n: usize) -> f64 {
    (hbar_eff * (n as f64 + 0.5) - pp.i_rs).powi(2) / (2.0 * pp.m_rs)
}

/// Splitting phase of the resonance-coupled pair, `2 |K| tau / hbar`.
pub fn rat_splitting(pp: &PendulumParams, hbar_eff: f64) -> f64 {
    2.0 * pp.k_rs.abs() * pp.tau / hbar_eff
}

/// Splitting phase in the harmonic regime, `r tau sqrt(2 |K| / m)`.
pub fn harmonic_splitting(pp: &PendulumParams) -> f64 {
    pp.r as f64 * pp.tau * (2.0 * pp.k_rs.abs() / pp.m_rs).sqrt()
}

/// `K = prefactor * eps^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub prefactor: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent)
    }
}

/// Kick strength where the RAT and harmonic splittings meet:
/// `2 A eps^b = r^2 hbar^2 / m`.
pub fn epsilon_max(k_fit: &PowerLaw, m_rs: f64, r: u32, hbar_eff: f64) -> Result<f64> {
    if !(k_fit.prefactor > 0.0) || !(k_fit.exponent > 0.0) {
        return Err(Error::InvalidFit(format!(
            "coupling fit needs positive prefactor and exponent, got {} and {}",
            k_fit.prefactor, k_fit.exponent
        )));
    }
    if !(m_rs > 0.0) || !(hbar_eff > 0.0) {
        return Err(Error::InvalidParameter("mass and hbar must be positive".into()));
    }
    let r = r as f64;
    Ok((r * r * hbar_eff * hbar_eff / (2.0 * k_fit.prefactor * m_rs)).powf(1.0 / k_fit.exponent))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(r: u32) -> Resonance {
        Resonance::new(r, 1).unwrap()
    }

    /// Areas and trace that realise given `a`, `b`.
    fn synthetic(a: f64, b: f64, r: u32, tau: f64) -> PendulumParams {
        let s_minus = 3.0;
        let trace = 2.0 * (b * (r * r) as f64 * tau).cos();
        pendulum_params_from(s_minus + 16.0 * a, s_minus, trace, res(r), tau, 0.01).unwrap()
    }

    #[test]
    fn synthetic_inversion() {
        let pp = synthetic(0.16, 0.5 / 8.0, 1, 8.0);
        assert!((pp.width() - 0.16).abs() < 1e-12);
        assert!((pp.frequency() - 0.5 / 8.0).abs() < 1e-12);
        // a = 0.16, b = 0.5 (time-scaled by tau = 1)
        let pp = synthetic(0.16, 0.5, 1, 1.0);
        assert!((pp.k_rs - 0.04).abs() < 1e-12 && (pp.m_rs - 0.32).abs() < 1e-12);
    }

    #[test]
    fn inversion_round_trip_is_exact() {
        for (a, b, r) in [(0.01, 0.003, 1), (0.2, 0.05, 2), (1e-4, 1e-3, 1)] {
            let pp = synthetic(a, b, r, 4.0);
            assert!((pp.width() - a).abs() <= 1e-12 * a.max(1.0));
            assert!((pp.frequency() - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn degenerate_and_domain_errors() {
        assert!(matches!(pendulum_params_from(2.0, 2.0, 1.0, res(1), 8.0, 0.0), Err(Error::DegenerateIsland)));
        assert!(matches!(
            pendulum_params_from(2.1, 2.0, 2.0, res(1), 8.0, 0.0),
            Err(Error::ArccosDomain { .. })
        ));
    }

    #[test]
    fn harmonic_splitting_arithmetic() {
        let pp = PendulumParams { i_rs: 0.0, m_rs: 0.32, k_rs: 0.04, r: 1, s: 1, tau: 8.0, epsilon: 0.0 };
        assert!((harmonic_splitting(&pp) - 4.0).abs() < 1e-12);
        let zero = PendulumParams { k_rs: 0.0, ..pp };
        assert_eq!(harmonic_splitting(&zero), 0.0);
        assert_eq!(rat_splitting(&zero, 0.01), 0.0);
    }

    #[test]
    fn rat_splitting_is_linear_in_inverse_hbar() {
        let pp = PendulumParams { i_rs: 0.5, m_rs: 1.6, k_rs: 3e-4, r: 1, s: 1, tau: 8.0, epsilon: 0.01 };
        let a = rat_splitting(&pp, 1.0 / 300.0);
        let b = rat_splitting(&pp, 1.0 / 600.0);
        assert!((b - 2.0 * a).abs() < 1e-14);
    }

    #[test]
    fn levels_minimum_and_symmetry() {
        let hbar = 0.01;
        let pp = PendulumParams { i_rs: hbar * 7.5, m_rs: 1.3, k_rs: 0.0, r: 2, s: 1, tau: 4.0, epsilon: 0.0 };
        assert!(pendulum_levels(&pp, hbar, 7).abs() < 1e-20);
        assert!((pendulum_levels(&pp, hbar, 5) - pendulum_levels(&pp, hbar, 9)).abs() < 1e-18);
    }

    #[test]
    fn degenerate_pair_condition() {
        // eps_n = eps_{n+r} exactly when I = hbar (n + (r + 1)/2)
        let hbar = 1.0 / 60.0;
        for r in [1u32, 2, 3] {
            let n = 11;
            let i_rs = hbar * (n as f64 + (r as f64 + 1.0) / 2.0);
            let pp = PendulumParams { i_rs, m_rs: 0.7, k_rs: 0.0, r, s: 1, tau: 1.0, epsilon: 0.0 };
            let (a, b) = (pendulum_levels(&pp, hbar, n), pendulum_levels(&pp, hbar, n + r as usize));
            assert!((a - b).abs() < 1e-16, "r = {r}");
        }
    }

    #[test]
    fn epsilon_max_scaling_with_hbar() {
        let m = 1.64;
        let lin = PowerLaw { prefactor: 0.014, exponent: 1.0 };
        let quad = PowerLaw { prefactor: 0.03, exponent: 2.0 };
        let ratio = |fit: &PowerLaw, r| {
            epsilon_max(fit, m, r, 1.0 / 150.0).unwrap() / epsilon_max(fit, m, r, 1.0 / 300.0).unwrap()
        };
        assert!((ratio(&lin, 1) - 4.0).abs() < 1e-12);
        assert!((ratio(&quad, 2) - 2.0).abs() < 1e-12);
        // closed form at the crossing: 2 K = r^2 hbar^2 / m
        let eps = epsilon_max(&quad, m, 2, 0.01).unwrap();
        assert!((2.0 * quad.eval(eps) - 4.0 * 1e-4 / m).abs() < 1e-18);
        assert!(matches!(
            epsilon_max(&PowerLaw { prefactor: -1.0, exponent: 1.0 }, m, 1, 0.01),
            Err(Error::InvalidFit(_))
        ));
    }
}
