use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Lmg;

/// Point `(phi, z)` on the Bloch sphere; `z = -cos(theta)` and `phi` are canonically
/// conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub phi: f64,
    pub z: f64,
}

impl PhasePoint {
    /// Validated constructor: folds `phi` into `[0, 2 pi)` and requires `|z| <= 1`.
    pub fn new(phi: f64, z: f64) -> Result<Self> {
        if !phi.is_finite() || !z.is_finite() || z.abs() > 1.0 {
            return Err(Error::InvalidParameter(format!("phase point ({phi}, {z}) out of bounds")));
        }
        Ok(Self { phi: fold_angle(phi), z })
    }

    /// At the poles `phi` carries no information.
    pub fn is_pole(&self) -> bool {
        self.z.abs() >= 1.0
    }
}

pub fn fold_angle(phi: f64) -> f64 {
    let f = phi.rem_euclid(2.0 * PI);
    if f >= 2.0 * PI {
        0.0
    } else {
        f
    }
}

/// Signed difference `a - b` wrapped into `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

/// `H0 = w0 z + (1 - z^2)/2 gamma_x cos^2 phi` (energy per `J`).
pub fn classical_energy(phi: f64, z: f64, lmg: &Lmg) -> f64 {
    let c = phi.cos();
    lmg.omega0 * z + 0.5 * (1.0 - z * z) * lmg.gamma_x * c * c
}

/// Hamilton's equations `(dphi/dt, dz/dt) = (dH/dz, -dH/dphi)`.
#[inline]
pub fn hamilton_rhs(phi: f64, z: f64, lmg: &Lmg) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    let dphi = lmg.omega0 - z * lmg.gamma_x * c * c;
    let dz = (1.0 - z * z) * lmg.gamma_x * s * c;
    (dphi, dz)
}

/// Outcome of a kick; `pole` is raised when the image sits on a pole and `phi` was set to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kicked {
    pub point: PhasePoint,
    pub pole: bool,
}

/// Rotation by `epsilon` about the x axis, matching the Heisenberg evolution of
/// `<J>` under `exp(-i eps Jx)`.
pub fn apply_kick(p: PhasePoint, epsilon: f64) -> Kicked {
    let (phi, z) = kick_raw(p.phi, p.z, epsilon);
    if z.abs() >= 1.0 {
        return Kicked { point: PhasePoint { phi: 0.0, z: z.signum() }, pole: true };
    }
    Kicked { point: PhasePoint { phi: fold_angle(phi), z }, pole: false }
}

/// Unfolded kick used inside the map; `phi` is returned in `(-pi, pi]`.
#[inline]
pub(crate) fn kick_raw(phi: f64, z: f64, epsilon: f64) -> (f64, f64) {
    if epsilon == 0.0 {
        return (phi, z);
    }
    let rho = (1.0 - z * z).max(0.0).sqrt();
    let (sp, cp) = phi.sin_cos();
    let (jx, jy, jz) = (rho * cp, rho * sp, z);
    let (se, ce) = epsilon.sin_cos();
    let jy2 = jy * ce - jz * se;
    let jz2 = (jz * ce + jy * se).clamp(-1.0, 1.0);
    let phi2 = if jx == 0.0 && jy2 == 0.0 { 0.0 } else { jy2.atan2(jx) };
    (phi2, jz2)
}

/// `z` on the energy contour `E` at angle `phi`, on the branch moving with `dphi/dt > 0`.
///
/// `None` when the contour does not reach this angle on the rotational branch.
pub fn z_on_contour(phi: f64, energy: f64, lmg: &Lmg) -> Option<f64> {
    let g = lmg.gamma_x * phi.cos().powi(2);
    let disc = lmg.omega0 * lmg.omega0 - 2.0 * energy * g + g * g;
    if disc < 0.0 {
        return None;
    }
    let z = (2.0 * energy - g) / (lmg.omega0 + disc.sqrt());
    (z.abs() <= 1.0).then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    const LMG: Lmg = Lmg { omega0: 1.0, gamma_x: -0.95 };

    #[test]
    fn energy_special_values() {
        for phi in [0.0, 1.0, 2.5] {
            assert_eq!(classical_energy(phi, -1.0, &LMG), -1.0);
        }
        assert!((classical_energy(PI / 2.0, 0.3, &LMG) - 0.3).abs() < 1e-15);
        assert!((classical_energy(0.0, 0.0, &LMG) + 0.475).abs() < 1e-15);
    }

    #[test]
    fn rhs_special_cases() {
        for z in [-1.0, 1.0] {
            assert_eq!(hamilton_rhs(0.7, z, &LMG).1, 0.0);
        }
        let free = Lmg { omega0: 1.3, gamma_x: 0.0 };
        assert_eq!(hamilton_rhs(0.4, 0.2, &free), (1.3, 0.0));
    }

    #[test]
    fn rhs_matches_central_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for _ in 0..100 {
            let phi = rng.gen_range(0.0..2.0 * PI);
            let z = rng.gen_range(-0.99..0.99);
            let dhdz = (classical_energy(phi, z + h, &LMG) - classical_energy(phi, z - h, &LMG)) / (2.0 * h);
            let dhdphi = (classical_energy(phi + h, z, &LMG) - classical_energy(phi - h, z, &LMG)) / (2.0 * h);
            let (dphi, dz) = hamilton_rhs(phi, z, &LMG);
            assert!((dphi - dhdz).abs() < 1e-8);
            assert!((dz + dhdphi).abs() < 1e-8);
        }
    }

    #[test]
    fn kick_identities() {
        let p = PhasePoint::new(1.2, 0.3).unwrap();
        assert_eq!(apply_kick(p, 0.0).point, p);
        let axis = PhasePoint::new(0.0, 0.0).unwrap();
        let k = apply_kick(axis, 0.9).point;
        assert!(k.phi.abs() < 1e-15 && k.z.abs() < 1e-15);
        // +y rotated by +pi/2 about x lands on +z
        let y = PhasePoint::new(PI / 2.0, 0.0).unwrap();
        let k = apply_kick(y, PI / 2.0);
        assert!(k.pole && k.point.z == 1.0 && k.point.phi == 0.0);
    }

    #[test]
    fn kick_preserves_sphere_and_inverts() {
        let p = PhasePoint::new(2.1, -0.4).unwrap();
        let q = apply_kick(apply_kick(p, 0.3).point, -0.3).point;
        assert!(angle_diff(q.phi, p.phi).abs() < 1e-14 && (q.z - p.z).abs() < 1e-14);
    }

    #[test]
    fn kick_near_pole_stays_finite() {
        let p = PhasePoint::new(0.3, -1.0 + 1e-12).unwrap();
        let k = apply_kick(p, 0.2).point;
        assert!(k.phi.is_finite() && k.z.is_finite());
    }

    #[test]
    fn contour_branch_lies_on_energy() {
        for phi in [0.0, 0.5, PI, 4.0] {
            let z = z_on_contour(phi, -0.723276, &LMG).unwrap();
            assert!((classical_energy(phi, z, &LMG) + 0.723276).abs() < 1e-14);
            assert!(hamilton_rhs(phi, z, &LMG).0 > 0.0);
        }
    }

    #[test]
    fn point_validation() {
        assert!(PhasePoint::new(0.0, 1.5).is_err());
        let p = PhasePoint::new(-0.5, 1.0).unwrap();
        assert!(p.is_pole());
        assert!((p.phi - (2.0 * PI - 0.5)).abs() < 1e-15);
    }
}
