//! Ordinary least squares in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extraction::PowerLaw;

/// Fewest points accepted by a fit.
pub const MIN_FIT_POINTS: usize = 4;

/// `ln y = intercept + slope ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    /// Natural-log intercept.
    pub intercept: f64,
    /// Root-mean-square residual of `ln y`.
    pub residual_rms: f64,
    pub n_points: usize,
}

impl PowerLawFit {
    pub fn power_law(&self) -> PowerLaw {
        PowerLaw { prefactor: self.intercept.exp(), exponent: self.slope }
    }
}

pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!("fit input lengths differ: {} vs {}", x.len(), y.len())));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("log-log fit needs finite positive data, got {v}")));
    }
    if x.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidFit(format!("{} points, at least {MIN_FIT_POINTS} needed", x.len())));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in lx.iter().zip(&ly) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::InvalidFit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(PowerLawFit { slope, intercept, residual_rms: (ss / n).sqrt(), n_points: lx.len() })
}
