use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::BoundaryPolynomial;
use crate::dpt::{jacobian_single, multipliers, step_single, DptError};
use crate::linalg::solve;
use crate::matrix::DenseMatrix;
use crate::partition::{gap_row, PartitionedProblem, DEGENERACY_TOL};
use crate::rng::{self, Stream};
use crate::{c64, fixtures, C64};

/// Fixtures with embedded boundary polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    TwoByTwo,
    ThreeByThree,
}

impl Fixture {
    pub fn problem(self, lambda: C64) -> PartitionedProblem {
        match self {
            Fixture::TwoByTwo => fixtures::two_by_two(lambda),
            Fixture::ThreeByThree => fixtures::three_by_three(lambda),
        }
    }

    pub fn polynomial(self, n: usize) -> Option<BoundaryPolynomial> {
        match self {
            Fixture::TwoByTwo if n < 2 => Some(BoundaryPolynomial::two_by_two()),
            Fixture::TwoByTwo => None,
            Fixture::ThreeByThree => BoundaryPolynomial::three_by_three(n),
        }
    }
}

const NEWTON_STARTS: usize = 64;
const NEWTON_MAX_ITER: usize = 100;
const DEDUP_TOL: f64 = 1e-8;

/// Fixed points of the single-row map `F_n` at `p.lambda`.
///
/// For `N = 2` the quadratic is solved in closed form. Otherwise Newton's
/// method on `F_n(z) - z` is started from `e_n` and from seeded random points
/// with `|z^m| ≤ 3`, widening the radius when fewer than `N` distinct points
/// are found; points closer than `1e-8` are merged.
pub fn fixed_points(p: &PartitionedProblem, n: usize, seed: u64) -> Result<Vec<Vec<C64>>, DptError> {
    let dim = p.n();
    if n >= dim {
        return Err(DptError::InvalidOption("row index out of range"));
    }
    let theta = gap_row(&p.d, n, DEGENERACY_TOL)?;
    if dim == 1 {
        return Ok(vec![vec![c64(1.0)]]);
    }
    if dim == 2 {
        return Ok(quadratic_fixed_points(p, n, &theta));
    }
    let mut rng = rng::stream(seed, Stream::MultiStart);
    let mut found: Vec<Vec<C64>> = Vec::new();
    let mut radius = 3.0;
    for _round in 0..3 {
        let mut starts = vec![unit(dim, n)];
        for _ in 0..NEWTON_STARTS {
            let mut z = unit(dim, n);
            for (m, x) in z.iter_mut().enumerate() {
                if m != n {
                    let r = radius * libm::sqrt(rng.random::<f64>());
                    let phi = core::f64::consts::TAU * rng.random::<f64>();
                    *x = C64::from_polar(r, phi);
                }
            }
            starts.push(z);
        }
        for z0 in starts {
            if let Some(z) = newton(p, n, &theta, z0) {
                let fresh = found.iter().all(|f| {
                    f.iter().zip(&z).fold(0.0f64, |m, (a, b)| m.max((a - b).norm())) > DEDUP_TOL * scale(&z)
                });
                if fresh {
                    found.push(z);
                }
            }
        }
        if found.len() >= dim {
            break;
        }
        radius *= 10.0;
    }
    Ok(found)
}

fn unit(dim: usize, n: usize) -> Vec<C64> {
    let mut z = vec![C64::new(0.0, 0.0); dim];
    z[n] = c64(1.0);
    z
}

fn scale(z: &[C64]) -> f64 {
    z.iter().fold(1.0f64, |m, x| m.max(x.norm()))
}

fn quadratic_fixed_points(p: &PartitionedProblem, n: usize, theta: &[C64]) -> Vec<Vec<C64>> {
    // z = e_n + x e_m solves  a x² + b x + c = 0
    let m = 1 - n;
    let t = p.lambda * theta[m];
    let d = |i: usize, j: usize| p.delta.get(i, j);
    let a = t * d(n, m);
    let b = c64(1.0) - t * (d(m, m) - d(n, n));
    let c = -t * d(m, n);
    let point = |x: C64| {
        let mut z = unit(2, n);
        z[m] = x;
        z
    };
    if a == C64::new(0.0, 0.0) {
        return if b == C64::new(0.0, 0.0) {
            Vec::new()
        } else {
            vec![point(-c / b)]
        };
    }
    let disc = (b * b - a * c * 4.0).sqrt();
    let q = if (b.conj() * disc).re >= 0.0 {
        -(b + disc) / 2.0
    } else {
        -(b - disc) / 2.0
    };
    let x1 = q / a;
    let x2 = if q == C64::new(0.0, 0.0) { x1 } else { c / q };
    if (x1 - x2).norm() <= DEDUP_TOL * x1.norm().max(1.0) {
        vec![point(x1)]
    } else {
        vec![point(x1), point(x2)]
    }
}

fn newton(p: &PartitionedProblem, n: usize, theta: &[C64], mut z: Vec<C64>) -> Option<Vec<C64>> {
    let dim = z.len();
    let keep: Vec<usize> = (0..dim).filter(|&i| i != n).collect();
    for _ in 0..NEWTON_MAX_ITER {
        let f = step_single(&z, n, theta, &p.delta, p.lambda).ok()?;
        let g: Vec<C64> = keep.iter().map(|&i| f[i] - z[i]).collect();
        let gnorm = g.iter().fold(0.0f64, |m, x| m.max(x.norm()));
        if !gnorm.is_finite() {
            return None;
        }
        if gnorm < 1e-14 * scale(&z) {
            return Some(z);
        }
        let j = jacobian_single(&z, n, theta, &p.delta, p.lambda);
        let k = keep.len();
        let jr = DenseMatrix::from_fn(k, k, |a, b| {
            let v = j[(keep[a], keep[b])];
            if a == b {
                v - c64(1.0)
            } else {
                v
            }
        });
        let dx = solve(&jr, &g).ok()?;
        for (idx, &i) in keep.iter().enumerate() {
            z[i] -= dx[idx];
        }
    }
    let f = step_single(&z, n, theta, &p.delta, p.lambda).ok()?;
    let res = keep.iter().fold(0.0f64, |m, &i| m.max((f[i] - z[i]).norm()));
    (res < 1e-12 * scale(&z)).then_some(z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub lambda: C64,
    pub fixed_points: usize,
    /// Smallest normalized `|P(λ, μ)|` over every (fixed point, multiplier)
    /// pair.
    pub min_residual: f64,
    /// Largest normalized `|P(λ, μ)|` over every pair.
    pub max_residual: f64,
    /// Set when no fixed point was located; such samples are skipped.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveValidation {
    pub samples: Vec<CurveSample>,
    /// Max over samples of the min-over-pairs residual.
    pub max_residual: f64,
    /// Max over samples and pairs.
    pub max_pair_residual: f64,
}

/// Locates every fixed point of row `n` at each λ, computes its multipliers
/// from the reduced Jacobian and evaluates the boundary polynomial on them.
pub fn validate_multiplier_curve(
    fixture: Fixture,
    n: usize,
    lambda_samples: &[C64],
) -> Result<CurveValidation, DptError> {
    let poly = fixture
        .polynomial(n)
        .ok_or(DptError::InvalidOption("fixture has no polynomial for this row"))?;
    let mut samples = Vec::with_capacity(lambda_samples.len());
    for (i, &lambda) in lambda_samples.iter().enumerate() {
        let p = fixture.problem(lambda);
        let theta = gap_row(&p.d, n, DEGENERACY_TOL)?;
        let points = fixed_points(&p, n, i as u64)?;
        let active: Vec<usize> = (0..p.n()).filter(|&m| m != n).collect();
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for z in &points {
            let j = jacobian_single(z, n, &theta, &p.delta, lambda);
            for mu in multipliers(&j, &active)? {
                let r = poly.normalized_residual(lambda, mu);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        samples.push(CurveSample {
            lambda,
            fixed_points: points.len(),
            min_residual: lo,
            max_residual: hi,
            skipped: points.is_empty(),
        });
    }
    let kept = samples.iter().filter(|s| !s.skipped);
    let max_residual = kept.clone().fold(0.0f64, |m, s| m.max(s.min_residual));
    let max_pair_residual = kept.fold(0.0f64, |m, s| m.max(s.max_residual));
    Ok(CurveValidation {
        samples,
        max_residual,
        max_pair_residual,
    })
}
