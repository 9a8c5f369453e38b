//! Thin wrappers over LAPACK for the two eigenproblems the pipeline needs.

use std::os::raw::{c_char, c_int};

use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a real symmetric matrix.
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    a.eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("symmetric eigensolver: {e}")))
}

/// Complex Schur decomposition `U = Q T Q^†` of a square matrix.
///
/// For a normal matrix `T` is diagonal up to rounding, so the Schur vectors are an
/// orthonormal eigenbasis even inside (near-)degenerate clusters. Returns the diagonal of
/// `T`, the Schur vectors as columns, and the largest strictly-upper entry of `T`.
pub fn complex_schur(u: &Array2<Complex64>) -> Result<(Array1<Complex64>, Array2<Complex64>, f64)> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::Linalg("Schur decomposition needs a square matrix".into()));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0)), 0.0));
    }
    let mut a = Array2::<Complex64>::zeros((n, n).f());
    a.assign(u);
    let mut vs = Array2::<Complex64>::zeros((n, n).f());
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut rwork = vec![0.0f64; n];
    let mut bwork = vec![0 as c_int; n];
    let n_c = n as c_int;
    let jobvs = b'V' as c_char;
    let sort = b'N' as c_char;
    let mut sdim: c_int = 0;
    let mut info: c_int = 0;

    let a_ptr = a.as_slice_memory_order_mut().expect("contiguous").as_mut_ptr();
    let vs_ptr = vs.as_slice_memory_order_mut().expect("contiguous").as_mut_ptr();

    // Workspace query followed by the actual call.
    let mut query = Complex64::new(0.0, 0.0);
    let mut lwork: c_int = -1;
    // SAFETY: all buffers are sized for an n x n problem and laid out column-major;
    // Complex64 is repr(C) {re, im}, identical to the bindgen complex type.
    unsafe {
        lapack_sys::zgees_(
            &jobvs,
            &sort,
            None,
            &n_c,
            a_ptr.cast(),
            &n_c,
            &mut sdim,
            w.as_mut_ptr().cast(),
            vs_ptr.cast(),
            &n_c,
            (&mut query as *mut Complex64).cast(),
            &lwork,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Linalg(format!("zgees workspace query failed (info = {info})")));
    }
    lwork = (query.re as c_int).max(2 * n_c);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    // SAFETY: as above; `work` has `lwork` entries.
    unsafe {
        lapack_sys::zgees_(
            &jobvs,
            &sort,
            None,
            &n_c,
            a_ptr.cast(),
            &n_c,
            &mut sdim,
            w.as_mut_ptr().cast(),
            vs_ptr.cast(),
            &n_c,
            work.as_mut_ptr().cast(),
            &lwork,
            rwork.as_mut_ptr(),
            bwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Linalg(format!("zgees failed to converge (info = {info})")));
    }
    let mut off = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            off = off.max(a[(i, j)].norm());
        }
    }
    Ok((Array1::from(w), vs, off))
}

/// Largest entry of `|A^† A - I|`.
pub fn unitarity_defect(u: &Array2<Complex64>) -> f64 {
    let n = u.nrows();
    let uh = u.t().mapv(|z| z.conj());
    let prod = uh.dot(u);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}
