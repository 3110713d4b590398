//! Characteristic polynomials and simultaneous polynomial root finding.
//!
//! Used for small matrices only: Jacobian multipliers and brute-force
//! eigenvalue oracles.

use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{DenseMatrix, MatrixError};
use crate::{c64, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("Durand-Kerner did not converge in {iterations} iterations (max correction {max_correction:e})")]
    NotConverged {
        iterations: usize,
        max_correction: f64,
        roots: Vec<C64>,
    },
    #[error("polynomial has zero leading coefficient")]
    ZeroLeading,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Monic characteristic polynomial `det(xI - a)` by Faddeev–LeVerrier.
///
/// Coefficients are returned highest degree first: `[1, c_1, ..., c_n]`.
pub fn characteristic_polynomial(a: &DenseMatrix) -> Result<Vec<C64>, MatrixError> {
    if !a.is_square() {
        return Err(MatrixError::NotSquare {
            op: "characteristic_polynomial",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut coeffs = vec![c64(1.0)];
    // M_0 = 0, c_0 = 1; M_k = A M_{k-1} + c_{k-1} I; c_k = -tr(A M_k)/k
    let mut m = DenseMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = a.matmul(&m)?;
        let prev = coeffs[k - 1];
        for i in 0..n {
            next[(i, i)] += prev;
        }
        m = next;
        let am = a.matmul(&m)?;
        let trace: C64 = (0..n).map(|i| am[(i, i)]).sum();
        coeffs.push(-trace / c64(k as f64));
    }
    Ok(coeffs)
}

/// Horner evaluation, coefficients highest degree first.
pub fn eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

pub const ROOT_TOL: f64 = 1e-12;
const ROOT_MAX_ITER: usize = 2_000;

/// All roots of the polynomial with coefficients `coeffs` (highest degree
/// first), by Durand–Kerner (Weierstrass) iteration.
///
/// Exact zero roots are deflated first. A root is accepted when its last
/// correction falls below `tol` (relative to `max(1, |z|)`) or when its
/// backward error reaches rounding level, which is what multiple roots
/// settle at.
pub fn roots(coeffs: &[C64], tol: f64) -> Result<Vec<C64>, RootError> {
    let lead_pos = coeffs
        .iter()
        .position(|c| *c != C64::new(0.0, 0.0))
        .ok_or(RootError::ZeroLeading)?;
    let mut p: Vec<C64> = coeffs[lead_pos..].to_vec();
    let mut out = Vec::new();
    while p.len() > 1 && *p.last().expect("nonempty") == C64::new(0.0, 0.0) {
        p.pop();
        out.push(C64::new(0.0, 0.0));
    }
    let lead = p[0];
    let monic: Vec<C64> = p.iter().map(|c| c / lead).collect();
    let deg = monic.len() - 1;
    match deg {
        0 => return Ok(out),
        1 => {
            out.push(-monic[1]);
            return Ok(out);
        }
        _ => {}
    }

    // Starting points on a circle of the Cauchy-bound radius, rotated off
    // the real axis.
    let radius = 1.0 + monic[1..].iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..deg)
        .map(|k| {
            let angle = 2.0 * core::f64::consts::PI * (k as f64) / (deg as f64) + 0.25;
            seed * C64::from_polar(radius * 0.5, angle)
        })
        .collect();
    let abs_coeffs: Vec<C64> = monic.iter().map(|c| c64(c.norm())).collect();

    let mut max_correction = f64::INFINITY;
    for _ in 0..ROOT_MAX_ITER {
        max_correction = 0.0;
        let mut all_done = true;
        for i in 0..deg {
            let zi = z[i];
            let num = eval(&monic, zi);
            let mut den = c64(1.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    den *= zi - zj;
                }
            }
            if den == C64::new(0.0, 0.0) {
                den = c64(f64::EPSILON);
            }
            let delta = num / den;
            z[i] = zi - delta;
            let scale = 1.0f64.max(z[i].norm());
            let corr = delta.norm() / scale;
            max_correction = max_correction.max(corr);
            let backward = eval(&abs_coeffs, c64(z[i].norm())).re;
            let at_rounding = eval(&monic, z[i]).norm() <= 16.0 * f64::EPSILON * backward;
            if corr > tol && !at_rounding {
                all_done = false;
            }
        }
        if all_done {
            out.extend(z);
            return Ok(out);
        }
    }
    out.extend(z.iter().copied());
    Err(RootError::NotConverged {
        iterations: ROOT_MAX_ITER,
        max_correction,
        roots: out,
    })
}

/// Eigenvalues of a small square matrix from its characteristic polynomial.
pub fn eigenvalues(a: &DenseMatrix, tol: f64) -> Result<Vec<C64>, RootError> {
    let p = characteristic_polynomial(a)?;
    roots(&p, tol)
}

/// Greedy matching distance between two multisets of complex numbers:
/// the largest distance after pairing each element of `a` with its nearest
/// unused partner in `b`.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charpoly_of_2x2() {
        let a = DenseMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let p = characteristic_polynomial(&a).unwrap();
        // x^2 - 5x - 2
        assert_eq!(p, vec![c64(1.0), c64(-5.0), c64(-2.0)]);
    }

    #[test]
    fn roots_of_known_polynomials() {
        // (x-1)(x-2)(x-3)
        let r = roots(&[c64(1.0), c64(-6.0), c64(11.0), c64(-6.0)], ROOT_TOL).unwrap();
        let expected = [c64(1.0), c64(2.0), c64(3.0)];
        assert!(multiset_distance(&r, &expected) < 1e-12);

        // x^2 + 1
        let r = roots(&[c64(1.0), c64(0.0), c64(1.0)], ROOT_TOL).unwrap();
        assert!(multiset_distance(&r, &[C64::new(0.0, 1.0), C64::new(0.0, -1.0)]) < 1e-12);
    }

    #[test]
    fn zero_roots_are_deflated() {
        let r = roots(&[c64(1.0), c64(0.0), c64(0.0), c64(0.0)], ROOT_TOL).unwrap();
        assert_eq!(r, vec![C64::new(0.0, 0.0); 3]);
    }

    #[test]
    fn double_root_is_accepted() {
        // (x-1)^2 (x+2)
        let r = roots(&[c64(1.0), c64(0.0), c64(-3.0), c64(2.0)], ROOT_TOL).unwrap();
        assert!(multiset_distance(&r, &[c64(1.0), c64(1.0), c64(-2.0)]) < 1e-6);
    }

    #[test]
    fn leading_zeros_are_skipped() {
        let r = roots(&[c64(0.0), c64(2.0), c64(-4.0)], ROOT_TOL).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - c64(2.0)).norm() < 1e-15);
        assert!(matches!(roots(&[c64(0.0)], ROOT_TOL), Err(RootError::ZeroLeading)));
    }

    #[test]
    fn eigenvalues_of_symmetric_3x3() {
        let a = DenseMatrix::from_real(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0])
            .unwrap();
        let ev = eigenvalues(&a, ROOT_TOL).unwrap();
        let s = libm::sqrt(2.0);
        assert!(multiset_distance(&ev, &[c64(2.0 - s), c64(2.0), c64(2.0 + s)]) < 1e-10);
    }
}
