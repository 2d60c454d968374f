//! Dense linear algebra helpers over `nalgebra`.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Pivot magnitudes below this fraction of the largest entry count as zero.
const SINGULAR_RATIO: f64 = 1e-13;

/// Solves `a * x = b` by LU with partial pivoting.
///
/// `what` names the matrix in the error when it is (numerically) singular.
pub fn solve<T>(a: &DMatrix<T>, b: &DMatrix<T>, what: &str) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("{what} is {}x{}, not square", a.nrows(), a.ncols())));
    }
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "{what} has {} rows but right-hand side has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    if a.nrows() == 0 {
        return Ok(DMatrix::zeros(0, b.ncols()));
    }
    let scale = a.iter().map(|v| v.modulus()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Singular(what.to_string()));
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let min_pivot = (0..u.nrows()).map(|i| u[(i, i)].modulus()).fold(f64::INFINITY, f64::min);
    if min_pivot <= SINGULAR_RATIO * scale {
        return Err(Error::Singular(what.to_string()));
    }
    lu.solve(b).ok_or_else(|| Error::Singular(what.to_string()))
}

/// Inverse through [`solve`] against the identity.
pub fn inverse<T>(a: &DMatrix<T>, what: &str) -> Result<DMatrix<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    solve(a, &DMatrix::identity(a.nrows(), a.nrows()), what)
}

/// Complex matrix-vector product on plain slices.
pub fn mat_vec(m: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    debug_assert_eq!(m.ncols(), x.len());
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

/// Adds `m * x` into `out`.
pub fn mat_vec_add(m: &CMatrix, x: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(m.ncols(), x.len());
    debug_assert_eq!(m.nrows(), out.len());
    for (i, o) in out.iter_mut().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            *o += m[(i, j)] * xj;
        }
    }
}

pub fn real_mat_vec(m: &RMatrix, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(m.ncols(), x.len());
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}
