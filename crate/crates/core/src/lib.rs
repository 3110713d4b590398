//! Dynamical perturbation theory for finite-dimensional eigenvalue problems.
//!
//! Given a partitioning `M = D + λΔ` with `D` diagonal and simple, the
//! eigenvectors of `M` are fixed points of a quadratic map on affine charts
//! of complex projective space. This crate iterates that map (for all rows at
//! once or for a single row), extracts eigenvalues, and provides the
//! Rayleigh–Schrödinger series as a baseline together with tools for
//! studying the convergence domain in the complex `λ`-plane.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! scans and the command-line front end live in the `dynspec` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod baseline;
pub mod dpt;
pub mod fixtures;
pub mod linalg;
pub mod matrix;
pub mod partition;
pub mod poly;
pub mod rng;
pub mod rspt;

pub use num_complex::Complex64 as C64;

pub use dpt::{ConvergenceReport, IterationOptions, Status};
pub use matrix::{DenseMatrix, DiagonalMatrix, Matrix, MatrixError, SparseMatrix};
pub use partition::{GapMatrix, PartitionedProblem};

/// Real number promoted to a complex double.
#[inline]
pub const fn c64(re: f64) -> C64 {
    C64::new(re, 0.0)
}
