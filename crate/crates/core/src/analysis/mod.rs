//! Convergence radius, λ-plane scans, bifurcation scans and the fixture
//! boundary polynomials.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::fixtures;
use crate::matrix::{spectral_norm_default, Matrix, SpectralNormError};
use crate::partition::GapMatrix;
use crate::C64;

mod curve;
mod scan;

pub use curve::{fixed_points, validate_multiplier_curve, CurveSample, CurveValidation, Fixture};
pub use scan::{
    bifurcation_scan, prepare_scan, run_cell, scan_cell, scan_domain, scan_options, Cell, CellClass,
    DomainGrid, GridSpec, ScanMode, ScanSetup,
    SCAN_MAX_ITER,
};

/// Radius of the ball around the unperturbed state used in the contraction
/// argument; `r/((1+r)(2+r))` is maximal at `r = √2`, which gives the
/// threshold `3 - 2√2`.
pub const OPTIMAL_BALL_RADIUS: f64 = core::f64::consts::SQRT_2;

/// `3 - 2√2`.
pub const RADIUS_CONSTANT: f64 = 3.0 - 2.0 * core::f64::consts::SQRT_2;

/// `(3 - 2√2) / (‖θ‖ ‖Δ‖)` in spectral norms. Every `|λ|` below it lies in
/// a region where the map contracts a ball of radius
/// [`OPTIMAL_BALL_RADIUS`] (in units of `|λ| ‖θ‖ ‖Δ‖`) around `I`.
pub fn guaranteed_radius(theta: &GapMatrix, delta: &Matrix) -> Result<f64, SpectralNormError> {
    let t = spectral_norm_default(&Matrix::Dense(theta.matrix().clone()))?;
    let d = spectral_norm_default(delta)?;
    Ok(RADIUS_CONSTANT / (t * d))
}

/// Bivariate integer polynomial `P(λ, μ) = Σ c λ^a μ^b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPolynomial {
    pub name: String,
    /// `(c, a, b)` triples.
    pub monomials: Vec<(i64, u32, u32)>,
}

impl BoundaryPolynomial {
    pub fn new(name: &str, monomials: &[(i64, u32, u32)]) -> Self {
        Self {
            name: name.into(),
            monomials: monomials.to_vec(),
        }
    }

    /// `4λ² + 2μ - μ²`.
    pub fn two_by_two() -> Self {
        Self::new("cardioid-2x2", fixtures::TWO_BY_TWO_CURVE)
    }

    /// Curve for row `n` (0-based) of the 3×3 fixture.
    pub fn three_by_three(n: usize) -> Option<Self> {
        const NAMES: [&str; 3] = ["n=1", "n=2", "n=3"];
        fixtures::three_by_three_curve(n).map(|t| Self::new(NAMES[n], t))
    }

    pub fn degrees(&self) -> (u32, u32) {
        self.monomials
            .iter()
            .fold((0, 0), |(a, b), m| (a.max(m.1), b.max(m.2)))
    }

    /// Largest `|c λ^a μ^b|`, the scale used to normalize residuals.
    pub fn max_monomial(&self, lambda: C64, mu: C64) -> f64 {
        self.monomials.iter().fold(0.0f64, |m, &(c, a, b)| {
            m.max(c.unsigned_abs() as f64 * libm::pow(lambda.norm(), a as f64) * libm::pow(mu.norm(), b as f64))
        })
    }

    /// `|P| / max |monomial|` (zero when every monomial vanishes).
    pub fn normalized_residual(&self, lambda: C64, mu: C64) -> f64 {
        let scale = self.max_monomial(lambda, mu);
        let value = eval_boundary_poly(self, lambda, mu).norm();
        if scale == 0.0 {
            value
        } else {
            value / scale
        }
    }
}

/// Nested Horner evaluation: outer in `λ`, inner in `μ`.
pub fn eval_boundary_poly(b: &BoundaryPolynomial, lambda: C64, mu: C64) -> C64 {
    let (da, db) = b.degrees();
    let mut table = vec![vec![0i64; db as usize + 1]; da as usize + 1];
    for &(c, a, m) in &b.monomials {
        table[a as usize][m as usize] += c;
    }
    let mut outer = C64::new(0.0, 0.0);
    for row in table.iter().rev() {
        let mut inner = C64::new(0.0, 0.0);
        for &c in row.iter().rev() {
            inner = inner * mu + c as f64;
        }
        outer = outer * lambda + inner;
    }
    outer
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::build_theta;
    use crate::{c64, fixtures};
    use proptest::prelude::*;

    #[test]
    fn radius_of_the_two_by_two_fixture() {
        let p = fixtures::two_by_two(c64(0.0));
        let r = guaranteed_radius(&build_theta(&p.d).unwrap(), &p.delta).unwrap();
        assert!((r - 0.171_572_875_253_809_9).abs() < 1e-12);
        let doubled = guaranteed_radius(&build_theta(&p.d).unwrap(), &p.delta.scale(c64(2.0))).unwrap();
        assert!((doubled - r / 2.0).abs() < 1e-12);
        let r0 = OPTIMAL_BALL_RADIUS;
        assert!((r0 / ((1.0 + r0) * (2.0 + r0)) - RADIUS_CONSTANT).abs() < 1e-15);
    }

    #[test]
    fn boundary_examples() {
        let row0 = BoundaryPolynomial::three_by_three(0).unwrap();
        assert_eq!(eval_boundary_poly(&row0, c64(0.0), c64(0.0)), c64(0.0));
        let cardioid = BoundaryPolynomial::two_by_two();
        assert!(eval_boundary_poly(&cardioid, C64::new(0.0, 0.5), c64(1.0)).norm() < 1e-15);
        let lambda = c64(libm::sqrt(3.0) / 2.0);
        assert!(eval_boundary_poly(&cardioid, lambda, c64(-1.0)).norm() < 1e-14);
        assert_eq!(row0.degrees(), (7, 6));
        assert!(BoundaryPolynomial::three_by_three(3).is_none());
    }

    proptest! {
        #[test]
        fn horner_matches_naive_sum(lr in -1.5f64..1.5, li in -1.5f64..1.5, mr in -2.0f64..2.0, mi in -2.0f64..2.0, n in 0usize..3) {
            let b = BoundaryPolynomial::three_by_three(n).unwrap();
            let (lambda, mu) = (C64::new(lr, li), C64::new(mr, mi));
            let naive = b.monomials.iter().fold(C64::new(0.0, 0.0), |s, &(c, a, m)| {
                s + lambda.powu(a) * mu.powu(m) * c as f64
            });
            let h = eval_boundary_poly(&b, lambda, mu);
            prop_assert!((h - naive).norm() <= 1e-12 * b.max_monomial(lambda, mu).max(1e-300));
        }
    }
}
