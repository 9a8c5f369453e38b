use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spin size `J`, stored as the integer `2J` so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Spin {
    two_j: u32,
}

impl Spin {
    pub fn new(j: f64) -> Result<Self> {
        let two_j = 2.0 * j;
        if !j.is_finite() || j <= 0.0 || (two_j - two_j.round()).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "spin size must be a positive integer or half-integer, got {j}"
            )));
        }
        Ok(Self { two_j: two_j.round() as u32 })
    }

    pub fn from_twice(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::InvalidParameter("spin size must be positive".into()));
        }
        Ok(Self { two_j })
    }

    pub fn j(self) -> f64 {
        f64::from(self.two_j) / 2.0
    }

    pub fn twice(self) -> u32 {
        self.two_j
    }

    /// Hilbert-space dimension `2J + 1`.
    pub fn dim(self) -> usize {
        self.two_j as usize + 1
    }

    /// Effective Planck constant `1/J`.
    pub fn hbar_eff(self) -> f64 {
        1.0 / self.j()
    }

    /// Magnetic quantum number of basis index `i` (ordering `m = -J, ..., J`).
    pub fn m(self, i: usize) -> f64 {
        i as f64 - self.j()
    }
}

/// Coefficients of the static LMG Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lmg {
    pub omega0: f64,
    pub gamma_x: f64,
}

impl Default for Lmg {
    fn default() -> Self {
        Self { omega0: 1.0, gamma_x: -0.95 }
    }
}

impl Lmg {
    pub fn new(omega0: f64, gamma_x: f64) -> Result<Self> {
        if !omega0.is_finite() || !gamma_x.is_finite() {
            return Err(Error::InvalidParameter("omega0 and gamma_x must be finite".into()));
        }
        Ok(Self { omega0, gamma_x })
    }
}

/// Periodic kick: period `tau` and rotation angle `epsilon` about the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kick {
    pub tau: f64,
    pub epsilon: f64,
}

impl Kick {
    pub fn new(tau: f64, epsilon: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter(format!("kick period must be > 0, got {tau}")));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kick strength must be >= 0, got {epsilon}"
            )));
        }
        Ok(Self { tau, epsilon })
    }
}

/// Resonance order `r:s` (`r` drive periods lock onto `s` orbit periods).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resonance {
    pub r: u32,
    pub s: u32,
}

impl Resonance {
    pub fn new(r: u32, s: u32) -> Result<Self> {
        if r == 0 || s == 0 {
            return Err(Error::InvalidParameter(format!("resonance {r}:{s} needs r, s >= 1")));
        }
        Ok(Self { r, s })
    }
}

impl std::fmt::Display for Resonance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.r, self.s)
    }
}

/// Full parameter set of one kicked-LMG run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub spin: Spin,
    pub lmg: Lmg,
    pub kick: Kick,
    pub resonance: Resonance,
}

impl ModelParams {
    pub fn new(spin: Spin, lmg: Lmg, kick: Kick, resonance: Resonance) -> Result<Self> {
        if spin.twice() < 2 {
            return Err(Error::InvalidParameter(
                "J >= 1 required: the coupling divides by 2J - 1".into(),
            ));
        }
        Ok(Self { spin, lmg, kick, resonance })
    }

    pub fn hbar_eff(&self) -> f64 {
        self.spin.hbar_eff()
    }
}
