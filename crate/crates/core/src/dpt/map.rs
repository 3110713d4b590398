use alloc::vec;
use alloc::vec::Vec;

use super::DptError;
use crate::matrix::{DenseMatrix, DiagonalMatrix, Matrix, MatrixError};
use crate::partition::GapMatrix;
use crate::poly::{self, RootError};
use crate::{c64, C64};

/// Writes `F_n(z)` into `out` given `dz = Δz`. Returns the largest change
/// `max_m |out[m] - z[m]|`.
#[inline]
pub(crate) fn apply_row(
    z: &[C64],
    dz: &[C64],
    n: usize,
    theta_row: &[C64],
    lambda: C64,
    out: &mut [C64],
) -> f64 {
    let pivot = dz[n];
    let mut step = 0.0f64;
    for m in 0..z.len() {
        let next = if m == n {
            c64(1.0)
        } else {
            lambda * theta_row[m] * (dz[m] - pivot * z[m])
        };
        let d = next - z[m];
        step = step.max(d.norm_sqr());
        out[m] = next;
    }
    libm::sqrt(step)
}

fn check_chart(z: &[C64], n: usize) -> Result<(), DptError> {
    if z[n] != c64(1.0) {
        return Err(DptError::ChartViolated { n, value: z[n] });
    }
    Ok(())
}

/// One application of the full map `F(A) = I + λ θ ⋆ (AΔ' - (AΔ') ▷ A)`.
pub fn step_full(
    a: &DenseMatrix,
    theta: &GapMatrix,
    delta: &Matrix,
    lambda: C64,
) -> Result<DenseMatrix, DptError> {
    let n = theta.size();
    if a.shape() != (n, n) || delta.shape() != (n, n) {
        return Err(MatrixError::ShapeMismatch {
            op: "step_full",
            left: a.shape(),
            right: delta.shape(),
        }
        .into());
    }
    let mut out = DenseMatrix::zeros(n, n);
    let mut dz = vec![C64::new(0.0, 0.0); n];
    for row in 0..n {
        let z = a.row(row);
        check_chart(z, row)?;
        delta.matvec_into(z, &mut dz);
        apply_row(z, &dz, row, theta.row(row), lambda, out.row_mut(row));
    }
    Ok(out)
}

/// One application of the single-row map `F_n`.
///
/// `theta_row` is row `n` of the gap matrix (see
/// [`GapMatrix::row`](crate::partition::GapMatrix::row) or
/// [`gap_row`](crate::partition::gap_row)).
pub fn step_single(
    z: &[C64],
    n: usize,
    theta_row: &[C64],
    delta: &Matrix,
    lambda: C64,
) -> Result<Vec<C64>, DptError> {
    let dim = z.len();
    if theta_row.len() != dim || delta.shape() != (dim, dim) || n >= dim {
        return Err(MatrixError::ShapeMismatch {
            op: "step_single",
            left: (dim, 1),
            right: delta.shape(),
        }
        .into());
    }
    check_chart(z, n)?;
    let mut dz = vec![C64::new(0.0, 0.0); dim];
    delta.matvec_into(z, &mut dz);
    let mut out = vec![C64::new(0.0, 0.0); dim];
    apply_row(z, &dz, n, theta_row, lambda, &mut out);
    Ok(out)
}

/// `ϵ_n + λ (Δz)^n`.
pub fn eigenvalue_of(z: &[C64], n: usize, d: &DiagonalMatrix, delta: &Matrix, lambda: C64) -> C64 {
    d[n] + lambda * delta.row_dot(n, z)
}

/// Analytic Jacobian of `F_n` at `z`:
/// `J[m][k] = λ θ_n^m (Δ[m][k] - δ_mk (Δz)^n - z^m Δ[n][k])`. Row `n` is zero.
pub fn jacobian_single(
    z: &[C64],
    n: usize,
    theta_row: &[C64],
    delta: &Matrix,
    lambda: C64,
) -> DenseMatrix {
    let dim = z.len();
    let dense = delta.to_dense();
    let pivot = delta.row_dot(n, z);
    DenseMatrix::from_fn(dim, dim, |m, k| {
        if m == n {
            return C64::new(0.0, 0.0);
        }
        let mut inner = dense[(m, k)] - z[m] * dense[(n, k)];
        if m == k {
            inner -= pivot;
        }
        lambda * theta_row[m] * inner
    })
}

/// Drops row and column `n` (the fixed chart coordinate).
pub fn reduced_jacobian(j: &DenseMatrix, n: usize) -> DenseMatrix {
    let keep: Vec<usize> = (0..j.rows()).filter(|&i| i != n).collect();
    DenseMatrix::from_fn(keep.len(), keep.len(), |a, b| j[(keep[a], keep[b])])
}

/// Largest Jacobian dimension accepted by [`multipliers`].
pub const MAX_MULTIPLIER_DIM: usize = 8;

/// Eigenvalues (multipliers) of `j` restricted to `active_dims`, from the
/// characteristic polynomial and Durand–Kerner.
pub fn multipliers(j: &DenseMatrix, active_dims: &[usize]) -> Result<Vec<C64>, DptError> {
    if active_dims.len() > MAX_MULTIPLIER_DIM {
        return Err(DptError::InvalidOption(
            "multipliers supports at most 8 active dimensions",
        ));
    }
    if active_dims.iter().any(|&i| i >= j.rows() || i >= j.cols()) {
        return Err(MatrixError::IndexOutOfBounds {
            row: j.rows(),
            col: j.cols(),
            rows: j.rows(),
            cols: j.cols(),
        }
        .into());
    }
    let k = active_dims.len();
    let sub = DenseMatrix::from_fn(k, k, |a, b| j[(active_dims[a], active_dims[b])]);
    if sub.max_abs() == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); k]);
    }
    poly::eigenvalues(&sub, poly::ROOT_TOL).map_err(|e: RootError| e.into())
}
