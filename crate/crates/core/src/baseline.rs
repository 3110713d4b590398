//! Classical iterative eigensolvers used as oracles and timing baselines.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{Lu, SolveError};
use crate::matrix::{norm2, norm_inf};
use crate::partition::PartitionedProblem;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub eigenvalue: C64,
    /// Unit 2-norm.
    pub vector: Vec<C64>,
    pub iterations: usize,
    /// `‖Mx - εx‖∞ / ‖x‖∞`.
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BaselineError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("preconditioned CG stalled after {iterations} iterations (relative residual {residual:e})")]
    CgStalled { iterations: usize, residual: f64 },
    #[error("shifted operator is not Hermitian positive definite")]
    NotHermitian,
    #[error("problem is empty")]
    Empty,
}

fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |s, (x, y)| s + x.conj() * y)
}

fn normalize(x: &mut [C64]) {
    let n = norm2(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Rayleigh quotient and scaled residual of a unit vector.
fn rayleigh(p: &PartitionedProblem, x: &[C64], mx: &mut [C64]) -> (C64, f64) {
    p.apply_into(x, mx);
    let e = cdot(x, mx);
    let r = mx.iter().zip(x).fold(0.0f64, |m, (a, b)| m.max((a - e * b).norm()));
    (e, r / norm_inf(x))
}

fn start_vector(n: usize) -> Vec<C64> {
    let mut x = vec![C64::new(1.0, 0.0); n];
    normalize(&mut x);
    x
}

/// Plain power iteration from the normalized all-ones vector; converges to
/// the eigenvalue of largest modulus.
pub fn power_iteration(
    p: &PartitionedProblem,
    tol: f64,
    max_iter: usize,
) -> Result<Eigenpair, BaselineError> {
    let n = p.n();
    if n == 0 {
        return Err(BaselineError::Empty);
    }
    let mut x = start_vector(n);
    let mut mx = vec![C64::new(0.0, 0.0); n];
    let mut e = C64::new(0.0, 0.0);
    let mut r = f64::INFINITY;
    for k in 1..=max_iter {
        let (ek, rk) = rayleigh(p, &x, &mut mx);
        e = ek;
        r = rk;
        if r < tol {
            return Ok(Eigenpair {
                eigenvalue: e,
                vector: x,
                iterations: k,
                residual: r,
                converged: true,
            });
        }
        x.copy_from_slice(&mx);
        normalize(&mut x);
    }
    Ok(Eigenpair {
        eigenvalue: e,
        vector: x,
        iterations: max_iter,
        residual: r,
        converged: false,
    })
}

/// Solves `(σI - M) y = b` for Hermitian positive definite `σI - M` with
/// Jacobi-preconditioned conjugate gradients.
pub fn shifted_cg(
    p: &PartitionedProblem,
    sigma: f64,
    b: &[C64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<C64>, BaselineError> {
    let n = p.n();
    let lambda = p.lambda;
    let delta_diag = p.delta.diagonal();
    let inv_diag: Vec<C64> = p
        .d
        .entries()
        .iter()
        .zip(&delta_diag)
        .map(|(&e, &dd)| (C64::new(sigma, 0.0) - e - lambda * dd).inv())
        .collect();
    if inv_diag.iter().any(|d| !(d.re > 0.0)) {
        return Err(BaselineError::NotHermitian);
    }
    let apply = |x: &[C64], out: &mut [C64]| {
        p.apply_into(x, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = xi * sigma - *o;
        }
    };
    let bnorm = norm2(b);
    let mut x = vec![C64::new(0.0, 0.0); n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<C64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut dir = z.clone();
    let mut ad = vec![C64::new(0.0, 0.0); n];
    let mut rz = cdot(&r, &z);
    for k in 0..max_iter {
        apply(&dir, &mut ad);
        let denom = cdot(&dir, &ad);
        if !(denom.re > 0.0) {
            return Err(BaselineError::NotHermitian);
        }
        let alpha = rz / denom;
        for i in 0..n {
            x[i] += alpha * dir[i];
            r[i] -= alpha * ad[i];
        }
        let rel = norm2(&r) / bnorm;
        if rel < tol {
            return Ok(x);
        }
        if k + 1 == max_iter {
            return Err(BaselineError::CgStalled {
                iterations: max_iter,
                residual: rel,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = cdot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            dir[i] = z[i] + beta * dir[i];
        }
    }
    Ok(x)
}

/// Power iteration on `(σI - M)⁻¹` for Hermitian `M` and `σ` above the
/// spectrum: converges to the largest eigenvalue at rate
/// `(σ - ε_1)/(σ - ε_2)`.
pub fn shift_invert_power(
    p: &PartitionedProblem,
    sigma: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Eigenpair, BaselineError> {
    let n = p.n();
    if n == 0 {
        return Err(BaselineError::Empty);
    }
    if p.lambda.im != 0.0 || !p.delta.is_symmetric(0.0) {
        return Err(BaselineError::NotHermitian);
    }
    let mut x = start_vector(n);
    let mut mx = vec![C64::new(0.0, 0.0); n];
    let mut e = C64::new(0.0, 0.0);
    let mut r = f64::INFINITY;
    for k in 1..=max_iter {
        let (ek, rk) = rayleigh(p, &x, &mut mx);
        e = ek;
        r = rk;
        if r < tol {
            return Ok(Eigenpair {
                eigenvalue: e,
                vector: x,
                iterations: k,
                residual: r,
                converged: true,
            });
        }
        x = shifted_cg(p, sigma, &x, 1e-14, 10 * n + 100)?;
        normalize(&mut x);
    }
    Ok(Eigenpair {
        eigenvalue: e,
        vector: x,
        iterations: max_iter,
        residual: r,
        converged: false,
    })
}

/// Rayleigh-quotient iteration with dense LU solves, started from `start`.
pub fn rayleigh_quotient_iteration(
    p: &PartitionedProblem,
    start: &[C64],
    tol: f64,
    max_iter: usize,
) -> Result<Eigenpair, BaselineError> {
    let n = p.n();
    if n == 0 {
        return Err(BaselineError::Empty);
    }
    let m = p.assemble();
    let mut x = start.to_vec();
    normalize(&mut x);
    let mut mx = vec![C64::new(0.0, 0.0); n];
    let (mut e, mut r) = rayleigh(p, &x, &mut mx);
    for k in 1..=max_iter {
        if r < tol {
            return Ok(Eigenpair {
                eigenvalue: e,
                vector: x,
                iterations: k - 1,
                residual: r,
                converged: true,
            });
        }
        let factor = |shift: C64| {
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[(i, i)] -= shift;
            }
            Lu::new(&shifted)
        };
        // a shift that hits the eigenvalue to rounding is nudged off it
        let lu = match factor(e) {
            Err(SolveError::Singular { .. }) => factor(e + 1e-12 * e.norm().max(1.0))?,
            other => other?,
        };
        x = lu.solve(&x);
        normalize(&mut x);
        (e, r) = rayleigh(p, &x, &mut mx);
    }
    Ok(Eigenpair {
        eigenvalue: e,
        vector: x,
        iterations: max_iter,
        residual: r,
        converged: r < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{build_benchmark, BenchFamily};
    use crate::{c64, fixtures};

    #[test]
    fn power_iteration_two_by_two() {
        // eigenvalues -0.0099, 1.0099: ratio 0.0098
        let out = power_iteration(&fixtures::two_by_two(c64(0.1)), 1e-12, 100).unwrap();
        assert!(out.converged);
        assert!((out.eigenvalue - c64((1.0 + libm::sqrt(1.04)) / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn shift_invert_matches_rqi() {
        let p = build_benchmark(BenchFamily::ErLaplacian, 60, 4, c64(0.05)).unwrap();
        let top = p.d.entries().iter().fold(f64::MIN, |m, e| m.max(e.re));
        let si = shift_invert_power(&p, top + 0.5, 1e-11, 200).unwrap();
        assert!(si.converged);
        let mut start = vec![C64::new(0.0, 0.0); 60];
        start[59] = c64(1.0);
        let rqi = rayleigh_quotient_iteration(&p, &start, 1e-11, 50).unwrap();
        assert!(rqi.converged, "{rqi:?}");
        assert!((si.eigenvalue - rqi.eigenvalue).norm() < 1e-9);
    }

    #[test]
    fn cg_rejects_indefinite_shift() {
        let p = fixtures::two_by_two(c64(0.1));
        let b = [c64(1.0), c64(1.0)];
        assert!(matches!(shifted_cg(&p, 0.5, &b, 1e-12, 10), Err(BaselineError::NotHermitian)));
    }
}
