use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::params::Spin;

/// Collective spin operators in the `Jz` eigenbasis ordered `m = -J, ..., J`.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub spin: Spin,
    /// Diagonal of `Jz`.
    pub jz: Array1<f64>,
    /// `Jx`: real symmetric tridiagonal with zero diagonal.
    pub jx: Array2<f64>,
}

/// Ladder coefficient `(1/2) sqrt(J(J+1) - m(m+1))` connecting `m` and `m + 1`.
fn half_ladder(j: f64, m: f64) -> f64 {
    0.5 * (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

pub fn build_spin_matrices(spin: Spin) -> SpinOperators {
    let n = spin.dim();
    let j = spin.j();
    let jz = Array1::from_shape_fn(n, |i| spin.m(i));
    let mut jx = Array2::zeros((n, n));
    for i in 0..n.saturating_sub(1) {
        let c = half_ladder(j, spin.m(i));
        jx[(i, i + 1)] = c;
        jx[(i + 1, i)] = c;
    }
    SpinOperators { spin, jz, jx }
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn jz_matrix(&self) -> Array2<f64> {
        Array2::from_diag(&self.jz)
    }

    /// `Jy = (i/2)(J- - J+)`; purely imaginary in this basis.
    pub fn jy(&self) -> Array2<Complex64> {
        let n = self.dim();
        let mut jy = Array2::zeros((n, n));
        for i in 0..n.saturating_sub(1) {
            let c = self.jx[(i, i + 1)];
            // <m+1|J+|m> = 2c, <m|J-|m+1> = 2c
            jy[(i + 1, i)] = Complex64::new(0.0, -c);
            jy[(i, i + 1)] = Complex64::new(0.0, c);
        }
        jy
    }

    /// Parity operator `exp(i pi (Jz + J))`, diagonal entries `(-1)^(m + J)`.
    pub fn parity(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.dim(), |i| if i % 2 == 0 { 1.0 } else { -1.0 })
    }
}
