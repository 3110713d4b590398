//! Rayleigh–Schrödinger series in the same matrix language as the map:
//!
//! ```text
//! a^(0) = I
//! a^(ℓ) = θ ⋆ (a^(ℓ-1) Δ' - Σ_{s<ℓ} (a^(s) Δ') ▷ a^(ℓ-1-s))
//! ε^(ℓ) = diag(a^(ℓ-1) Δ')
//! ```
//!
//! Order `ℓ` costs one product with `Δ` and `ℓ` diagonal scalings, so `k`
//! orders cost O(k²N²) on top of `k` products and keep all `k` coefficient
//! matrices alive.

use alloc::vec;
use alloc::vec::Vec;

use crate::dpt::{iterate_fixed_steps, iterate_full, residuals, DptError, EigenIterate, IterationOptions, Status};
use crate::matrix::{mul_transpose, DenseMatrix};
use crate::partition::{build_theta, GapMatrix, PartitionedProblem};
use crate::C64;

/// Coefficients `a^(0..=k)` and eigenvalue corrections `ε^(0..=k)`, with
/// `ε^(0) = ϵ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RSExpansion {
    pub coefficients: Vec<DenseMatrix>,
    pub eigencorrections: Vec<Vec<C64>>,
}

impl RSExpansion {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// Streaming generator of the scaled terms `b^(ℓ) = λ^ℓ a^(ℓ)`; the scaling
/// keeps high orders representable when `|λ|` is far from 1.
pub struct RsSeries<'a> {
    p: &'a PartitionedProblem,
    theta: GapMatrix,
    lambda: C64,
    terms: Vec<DenseMatrix>,
    /// `diag(b^(s) Δ')` for each stored term.
    pivots: Vec<Vec<C64>>,
    /// `b^(ℓ) Δ'` for the newest term.
    last_product: DenseMatrix,
}

impl<'a> RsSeries<'a> {
    /// Uses `p.d` and `p.delta`; `p.lambda` is ignored in favour of `lambda`.
    pub fn new(p: &'a PartitionedProblem, lambda: C64) -> Result<Self, DptError> {
        let theta = build_theta(&p.d)?;
        let b0 = DenseMatrix::identity(p.n());
        let product = mul_transpose(&b0, &p.delta)?;
        Ok(Self {
            p,
            theta,
            lambda,
            pivots: vec![product.diagonal()],
            terms: vec![b0],
            last_product: product,
        })
    }

    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn term(&self, l: usize) -> &DenseMatrix {
        &self.terms[l]
    }

    /// `λ^ℓ ε^(ℓ)` for `ℓ = order() + 1`, available before that term is built.
    pub fn next_eigencorrection(&self) -> Vec<C64> {
        self.pivots[self.order()].iter().map(|&x| x * self.lambda).collect()
    }

    /// Builds the next term and returns it.
    pub fn advance(&mut self) -> Result<&DenseMatrix, DptError> {
        let l = self.terms.len();
        let n = self.p.n();
        let mut next = self.last_product.clone();
        for s in 0..l {
            let pivot = &self.pivots[s];
            let b = &self.terms[l - 1 - s];
            for m in 0..n {
                let scale = pivot[m];
                if scale == C64::new(0.0, 0.0) {
                    continue;
                }
                for (out, &x) in next.row_mut(m).iter_mut().zip(b.row(m)) {
                    *out -= scale * x;
                }
            }
        }
        for m in 0..n {
            let theta_row = self.theta.row(m);
            for (out, &t) in next.row_mut(m).iter_mut().zip(theta_row) {
                *out *= self.lambda * t;
            }
        }
        self.last_product = mul_transpose(&next, &self.p.delta)?;
        self.pivots.push(self.last_product.diagonal());
        self.terms.push(next);
        Ok(&self.terms[l])
    }
}

/// Coefficients up to order `k`; `p.lambda` is not used.
pub fn rs_coefficients(p: &PartitionedProblem, k: usize) -> Result<RSExpansion, DptError> {
    let mut series = RsSeries::new(p, C64::new(1.0, 0.0))?;
    let mut eigencorrections = vec![p.d.entries().to_vec()];
    for _ in 0..k {
        eigencorrections.push(series.next_eigencorrection());
        series.advance()?;
    }
    Ok(RSExpansion {
        coefficients: series.terms,
        eigencorrections,
    })
}

/// `A_RS^(k) = Σ a^(ℓ) λ^ℓ` and `ε = Σ ε^(ℓ) λ^ℓ`, by Horner's rule.
pub fn rs_partial_sum(e: &RSExpansion, lambda: C64) -> (DenseMatrix, Vec<C64>) {
    let mut acc = e.coefficients[e.order()].clone();
    for a in e.coefficients[..e.order()].iter().rev() {
        for (x, &y) in acc.data_mut().iter_mut().zip(a.data()) {
            *x = *x * lambda + y;
        }
    }
    let mut eig = e.eigencorrections[e.order()].clone();
    for corr in e.eigencorrections[..e.order()].iter().rev() {
        for (x, &y) in eig.iter_mut().zip(corr) {
            *x = *x * lambda + y;
        }
    }
    (acc, eig)
}

/// `max |A_D^(k) - A_RS^(k)|` at `lambda`.
pub fn truncation_agreement(p: &PartitionedProblem, k: usize, lambda: C64) -> Result<f64, DptError> {
    let q = p.with_lambda(lambda);
    let theta = build_theta(&q.d)?;
    let d = iterate_fixed_steps(&q, &theta, k)?;
    let (rs, _) = rs_partial_sum(&rs_coefficients(p, k)?, lambda);
    Ok(d.max_abs_diff(&rs))
}

/// Stopping rules shared by both sides of [`compare_orders`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    /// Step tolerance relative to `max(1, max |A|)`.
    pub tol: f64,
    pub residual_tol: f64,
    pub max_order: usize,
    pub divergence_threshold: f64,
    /// The RS side is declared divergent once the step exceeds
    /// `growth_factor` times its running minimum for `growth_run`
    /// consecutive orders.
    pub growth_factor: f64,
    pub growth_run: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            residual_tol: 1e-10,
            max_order: 500,
            divergence_threshold: 1e8,
            growth_factor: 1e3,
            growth_run: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderComparison {
    pub k_d: usize,
    pub k_rs: usize,
    pub d_converged: bool,
    pub rs_converged: bool,
}

/// Outcome of summing the series alone.
#[derive(Debug, Clone, PartialEq)]
pub struct RsRun {
    pub order: usize,
    pub converged: bool,
    pub diverged: bool,
    pub partial_sum: DenseMatrix,
    pub eigenvalues: Vec<C64>,
    pub step_norm: f64,
}

/// Sums the series until the step criterion holds and every row residual is
/// verified, or a divergence rule fires, or `max_order` is reached.
pub fn rs_converge(p: &PartitionedProblem, lambda: C64, opts: &CompareOptions) -> Result<RsRun, DptError> {
    let q = p.with_lambda(lambda);
    let n = q.n();
    let mut series = RsSeries::new(p, lambda)?;
    let mut sum = DenseMatrix::identity(n);
    let mut running_min = f64::INFINITY;
    let mut growth = 0;
    let mut step = f64::INFINITY;
    let mut diverged = false;
    let mut converged = false;
    while series.order() < opts.max_order {
        let term = series.advance()?;
        step = term.max_abs();
        for (x, &y) in sum.data_mut().iter_mut().zip(term.data()) {
            *x += y;
        }
        let size = sum.max_abs();
        if !step.is_finite() || !(size <= opts.divergence_threshold) {
            diverged = true;
            break;
        }
        running_min = running_min.min(step);
        if step > opts.growth_factor * running_min {
            growth += 1;
            if growth >= opts.growth_run {
                diverged = true;
                break;
            }
        } else {
            growth = 0;
        }
        if step <= opts.tol * size.max(1.0) {
            let it = EigenIterate {
                a: sum.clone(),
                charts: (0..n).collect(),
                k: series.order(),
            };
            let (_, res) = residuals(&q, &it);
            if res.iter().all(|&r| r < opts.residual_tol) {
                converged = true;
                break;
            }
        }
    }
    let it = EigenIterate {
        a: sum,
        charts: (0..n).collect(),
        k: series.order(),
    };
    let (eigenvalues, _) = residuals(&q, &it);
    Ok(RsRun {
        order: series.order(),
        converged,
        diverged,
        partial_sum: it.a,
        eigenvalues,
        step_norm: step,
    })
}

/// Orders needed by the map iteration and by the series to meet the same
/// stopping rule at `lambda`.
pub fn compare_orders(
    p: &PartitionedProblem,
    lambda: C64,
    opts: &CompareOptions,
) -> Result<OrderComparison, DptError> {
    let d_opts = IterationOptions {
        tol: opts.tol,
        residual_tol: opts.residual_tol,
        max_iter: opts.max_order,
        divergence_threshold: opts.divergence_threshold,
        ..IterationOptions::default()
    };
    let d = iterate_full(&p.with_lambda(lambda), &d_opts)?;
    let rs = rs_converge(p, lambda, opts)?;
    Ok(OrderComparison {
        k_d: d.iterations,
        k_rs: rs.order,
        d_converged: d.status == Status::Converged,
        rs_converged: rs.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, two_by_two_eigenvalues};
    use crate::matrix::{hadamard_dense, Matrix};
    use crate::{c64, partition};

    fn theta_delta(p: &PartitionedProblem) -> (DenseMatrix, DenseMatrix) {
        (build_theta(&p.d).unwrap().matrix().clone(), p.delta.to_dense().transpose())
    }

    #[test]
    fn first_two_coefficients() {
        let p = partition::build_random_uniform(4, 3).unwrap().to_epstein_nesbet();
        let e = rs_coefficients(&p, 2).unwrap();
        let (theta, dt) = theta_delta(&p);
        let a1 = hadamard_dense(&theta, &dt).unwrap();
        assert!(e.coefficients[1].max_abs_diff(&a1) < 1e-15);
        let a2 = hadamard_dense(&theta, &a1.matmul(&dt).unwrap()).unwrap();
        assert!(e.coefficients[2].max_abs_diff(&a2) < 1e-14);
        assert_eq!(e.coefficients[0], DenseMatrix::identity(4));
    }

    #[test]
    fn intermediate_normalization() {
        let p = partition::build_random_uniform(5, 9).unwrap();
        let e = rs_coefficients(&p, 8).unwrap();
        for a in &e.coefficients[1..] {
            assert!(a.diagonal().iter().all(|x| x.norm() < 1e-14));
        }
    }

    #[test]
    fn order_zero_is_unperturbed() {
        let p = fixtures::three_by_three(c64(0.3));
        let e = rs_coefficients(&p, 0).unwrap();
        let (a, eig) = rs_partial_sum(&e, c64(0.3));
        assert_eq!(a, DenseMatrix::identity(3));
        assert_eq!(eig, p.d.entries());
    }

    #[test]
    fn two_by_two_series_converges_inside_disk() {
        let e = rs_coefficients(&fixtures::two_by_two(c64(0.0)), 30).unwrap();
        let (a, eig) = rs_partial_sum(&e, c64(0.1));
        let (minus, plus) = two_by_two_eigenvalues(c64(0.1));
        assert!((eig[0] - minus).norm() < 1e-12);
        assert!((eig[1] - plus).norm() < 1e-12);
        // eigenvector (1, x*) with x* = ε_-/λ
        assert!((a[(0, 1)] - minus / 0.1).norm() < 1e-12);
    }

    #[test]
    fn two_by_two_series_diverges_outside_disk() {
        let p = fixtures::two_by_two(c64(0.0));
        let e = rs_coefficients(&p, 60).unwrap();
        let lambda = c64(0.6);
        let size = |k: usize| {
            let trunc = RSExpansion {
                coefficients: e.coefficients[..=k].to_vec(),
                eigencorrections: e.eigencorrections[..=k].to_vec(),
            };
            rs_partial_sum(&trunc, lambda).0.max_abs()
        };
        assert!(size(60) > 10.0 * size(20));
    }

    #[test]
    fn scaled_and_plain_terms_agree() {
        let p = fixtures::three_by_three(c64(0.0));
        let lambda = C64::new(0.2, -0.1);
        let e = rs_coefficients(&p, 6).unwrap();
        let mut s = RsSeries::new(&p, lambda).unwrap();
        for l in 1..=6 {
            let b = s.advance().unwrap().clone();
            let expected = e.coefficients[l].scale(lambda.powu(l as u32));
            assert!(b.max_abs_diff(&expected) < 1e-14);
        }
    }

    #[test]
    fn first_order_truncation_is_exact() {
        let p = partition::build_random_uniform(5, 1).unwrap().to_epstein_nesbet();
        assert!(truncation_agreement(&p, 1, c64(0.05)).unwrap() < 1e-15);
        assert_eq!(truncation_agreement(&p, 3, c64(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn compare_two_by_two() {
        let p = fixtures::two_by_two(c64(0.0));
        let opts = CompareOptions::default();
        let c = compare_orders(&p, c64(0.3), &opts).unwrap();
        assert!(c.d_converged && c.rs_converged);
        assert!(c.k_rs > c.k_d);

        let c = compare_orders(&p, c64(0.6), &opts).unwrap();
        assert!(c.d_converged);
        assert!(!c.rs_converged);

        let c = compare_orders(&p, c64(0.0), &opts).unwrap();
        assert_eq!((c.k_d, c.k_rs), (1, 1));
        assert!(c.d_converged && c.rs_converged);
    }

    #[test]
    fn diverging_series_is_flagged() {
        let p = fixtures::two_by_two(c64(0.0));
        let run = rs_converge(&p, c64(0.8), &CompareOptions::default()).unwrap();
        assert!(run.diverged);
        assert!(!run.converged);
        let sparse = PartitionedProblem::new(p.d.clone(), Matrix::Sparse(p.delta.to_dense().to_sparse()), c64(0.0)).unwrap();
        assert!(rs_converge(&sparse, c64(0.1), &CompareOptions::default()).unwrap().converged);
    }
}
