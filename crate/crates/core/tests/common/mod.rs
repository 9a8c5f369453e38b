//! Spin coherent states and their exact rotation, shared by integration tests.

use lmg_rat::linalg::symmetric_eigen;
use lmg_rat::quantum::build_spin_matrices;
use lmg_rat::Spin;
use ndarray::Array1;
use num_complex::Complex64;

/// Coherent state along `(phi, z)`, amplitudes in the `m = -J..J` basis.
pub fn coherent_state(spin: Spin, phi: f64, z: f64) -> Array1<Complex64> {
    let two_j = spin.twice() as usize;
    let theta = z.clamp(-1.0, 1.0).acos();
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let ln_fact = |n: usize| (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    Array1::from_iter((0..=two_j).map(|i| {
        let m = spin.m(i);
        let up = i; // J + m
        let down = two_j - i;
        let ln_binom = ln_fact(two_j) - ln_fact(up) - ln_fact(down);
        let ln_mag = 0.5 * ln_binom + up as f64 * c.ln() + down as f64 * s.ln();
        Complex64::from_polar(ln_mag.exp(), -m * phi)
    }))
}

pub fn bloch_vector(spin: Spin, psi: &Array1<Complex64>) -> (f64, f64) {
    let ops = build_spin_matrices(spin);
    let jx = ops.jx.mapv(|v| Complex64::new(v, 0.0));
    let jy = ops.jy();
    let ex = psi.mapv(|a| a.conj()).dot(&jx.dot(psi)).re;
    let ey = psi.mapv(|a| a.conj()).dot(&jy.dot(psi)).re;
    let ez: f64 = psi.iter().zip(ops.jz.iter()).map(|(a, m)| a.norm_sqr() * m).sum();
    (ey.atan2(ex), ez / spin.j())
}

pub fn quantum_kick(spin: Spin, psi: &Array1<Complex64>, epsilon: f64) -> Array1<Complex64> {
    let ops = build_spin_matrices(spin);
    let (vals, vecs) = symmetric_eigen(&ops.jx).unwrap();
    let vecs_c = vecs.mapv(|v| Complex64::new(v, 0.0));
    let coeffs = vecs_c.t().dot(psi);
    let rotated = Array1::from_iter(
        coeffs.iter().zip(vals.iter()).map(|(c, &l)| c * Complex64::from_polar(1.0, -epsilon * l)),
    );
    vecs_c.dot(&rotated)
}
