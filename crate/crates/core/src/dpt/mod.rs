//! Dynamical perturbation theory: the quadratic map whose fixed points are
//! the eigenvectors of `M = D + λΔ`, and the drivers that iterate it.
//!
//! Row `n` of the iterate `A` is a candidate eigenvector `z_n` in the chart
//! `z_n^n = 1`. One application of the map is
//!
//! ```text
//! F_n^m(z) = δ_n^m + λ θ_n^m ((Δz)^m - (Δz)^n z^m)
//! ```
//!
//! and the eigenvalue attached to a row is `ϵ_n + λ (Δz)^n`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::linalg::SolveError;
use crate::matrix::{DenseMatrix, MatrixError};
use crate::partition::PartitionError;
use crate::poly::RootError;
use crate::C64;

mod dominant;
mod driver;
mod homotopy;
mod map;

pub use dominant::{dominant_eigenpair, DominantEigenpair};
pub use driver::{
    iterate_fixed_steps, iterate_from, iterate_full, iterate_ramped, iterate_single, residuals,
    Mode,
};
pub use homotopy::homotopy_solve;
pub(crate) use map::apply_row;
pub use map::{
    eigenvalue_of, jacobian_single, multipliers, reduced_jacobian, step_full, step_single,
    MAX_MULTIPLIER_DIM,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DptError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("eigenvector matrix is singular: {0}")]
    Singular(#[from] SolveError),
    #[error(transparent)]
    Roots(#[from] RootError),
    #[error("invalid option: {0}")]
    InvalidOption(&'static str),
    #[error("chart condition violated: z[{n}] = {value} instead of 1")]
    ChartViolated { n: usize, value: C64 },
    #[error("homotopy stage {stage} of {stages} ended with status {status:?}")]
    StageFailed {
        stage: usize,
        stages: usize,
        status: Status,
        partial: Box<ConvergenceReport>,
    },
}

/// Outcome of an iteration run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    /// Step norm below tolerance and every residual verified.
    Converged,
    /// Iteration budget spent without escaping and without progress: a
    /// periodic or chaotic orbit.
    BoundedNonConverged,
    /// Some entry exceeded the divergence threshold or became non-finite.
    Diverged,
    /// Iteration budget spent while the step norm was still shrinking.
    MaxIterations,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::BoundedNonConverged => "bounded_non_converged",
            Status::Diverged => "diverged",
            Status::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOptions {
    /// Step tolerance on `max |A^(k) - A^(k-1)|`, relative to `max(1, max |A|)`.
    pub tol: f64,
    /// Bound on every row residual `‖Mz - εz‖∞ / ‖z‖∞`.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Escape radius on the largest entry modulus.
    pub divergence_threshold: f64,
    /// Number of trailing steps compared against the preceding ones to tell
    /// a stalled orbit from slow convergence.
    pub cycle_window: usize,
    /// Record one [`TraceRecord`] per iteration.
    pub trace: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            residual_tol: 1e-10,
            max_iter: 10_000,
            divergence_threshold: 1e8,
            cycle_window: 64,
            trace: false,
        }
    }
}

impl IterationOptions {
    pub fn validate(&self) -> Result<(), DptError> {
        if !(self.tol > 0.0) {
            return Err(DptError::InvalidOption("tol must be positive"));
        }
        if !(self.residual_tol > 0.0) {
            return Err(DptError::InvalidOption("residual_tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(DptError::InvalidOption("max_iter must be positive"));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(DptError::InvalidOption(
                "divergence_threshold must be positive",
            ));
        }
        if self.cycle_window == 0 {
            return Err(DptError::InvalidOption("cycle_window must be positive"));
        }
        Ok(())
    }
}

/// Stack of candidate eigenvectors; row `i` lives in the chart
/// `charts[i]`, where its entry is exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenIterate {
    pub a: DenseMatrix,
    pub charts: Vec<usize>,
    pub k: usize,
}

impl EigenIterate {
    pub fn identity(n: usize) -> Self {
        Self {
            a: DenseMatrix::identity(n),
            charts: (0..n).collect(),
            k: 0,
        }
    }

    /// Single unperturbed vector `e_n` of dimension `dim`.
    pub fn unit(dim: usize, n: usize) -> Self {
        let mut a = DenseMatrix::zeros(1, dim);
        a[(0, n)] = crate::c64(1.0);
        Self {
            a,
            charts: alloc::vec![n],
            k: 0,
        }
    }

    pub fn row(&self, i: usize) -> &[C64] {
        self.a.row(i)
    }
}

/// One line of the per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub step_norm: f64,
    pub max_residual: f64,
    /// `max_n |ε_n^(k) - ε_n^(k-1)|`.
    pub eigenvalue_change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub iterate: EigenIterate,
    /// One eigenvalue per row of the iterate.
    pub eigenvalues: Vec<C64>,
    pub status: Status,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub step_norm: f64,
    /// Iteration at which the divergence threshold was crossed.
    pub escape_iteration: Option<usize>,
    pub trace: Vec<TraceRecord>,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &r| m.max(r))
    }
}
