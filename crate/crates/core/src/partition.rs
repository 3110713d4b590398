//! Perturbative partitionings `M = D + λΔ`, gap matrices, and the benchmark
//! problem families.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::matrix::{DenseMatrix, DiagonalMatrix, Matrix, MatrixError, SparseMatrix};
use crate::rng::{self, Stream};
use crate::{c64, C64};

/// Minimum relative gap between unperturbed eigenvalues. The scale is
/// `max(1, max |ϵ_n|)`.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PartitionError {
    #[error("degenerate unperturbed spectrum: ϵ_{i} and ϵ_{j} differ by {gap:e}")]
    DegenerateSpectrum { i: usize, j: usize, gap: f64 },
    #[error("an Erdős–Rényi graph with {n} vertices and {n} edges needs n >= 3")]
    TooFewVertices { n: usize },
    #[error("problem size must be at least 1")]
    EmptyProblem,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// `M = D + λΔ` with `D` diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedProblem {
    pub d: DiagonalMatrix,
    pub delta: Matrix,
    pub lambda: C64,
}

/// How a full matrix is split into diagonal and perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartitionMode {
    /// `D = diag(M)`, `Δ = M - diag(M)` (Epstein–Nesbet).
    #[default]
    DiagonalSplit,
}

impl PartitionedProblem {
    pub fn new(d: DiagonalMatrix, delta: Matrix, lambda: C64) -> Result<Self, PartitionError> {
        let n = d.size();
        if delta.rows() != n || delta.cols() != n {
            return Err(MatrixError::ShapeMismatch {
                op: "partitioned problem",
                left: (n, n),
                right: delta.shape(),
            }
            .into());
        }
        Ok(Self { d, delta, lambda })
    }

    pub fn n(&self) -> usize {
        self.d.size()
    }

    pub fn with_lambda(&self, lambda: C64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// True when `Δ` has an exactly zero diagonal.
    pub fn is_epstein_nesbet(&self) -> bool {
        self.delta.diagonal().iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// Dense `D + λΔ`.
    pub fn assemble(&self) -> DenseMatrix {
        let mut m = self.delta.to_dense().scale(self.lambda);
        for (i, &e) in self.d.entries().iter().enumerate() {
            m[(i, i)] += e;
        }
        m
    }

    /// `M z` without assembling `M`.
    pub fn apply(&self, z: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n()];
        self.apply_into(z, &mut out);
        out
    }

    pub fn apply_into(&self, z: &[C64], out: &mut [C64]) {
        self.delta.matvec_into(z, out);
        for ((o, &e), &zi) in out.iter_mut().zip(self.d.entries()).zip(z) {
            *o = e * zi + self.lambda * *o;
        }
    }

    /// Moves the diagonal of `λΔ` into `D`, leaving a zero-diagonal `Δ`
    /// with the same `λ`.
    pub fn to_epstein_nesbet(&self) -> Self {
        let shift = self.delta.diagonal();
        let d = DiagonalMatrix::new(
            self.d
                .entries()
                .iter()
                .zip(&shift)
                .map(|(&e, &s)| e + self.lambda * s)
                .collect(),
        );
        Self {
            d,
            delta: self.delta.without_diagonal(),
            lambda: self.lambda,
        }
    }

    pub fn theta(&self) -> Result<GapMatrix, PartitionError> {
        build_theta(&self.d)
    }
}

/// Splits `m` into `D = diag(m)` and `Δ = m - D` with `λ = 1`.
pub fn partition(m: &Matrix, mode: PartitionMode) -> Result<PartitionedProblem, PartitionError> {
    if m.rows() != m.cols() {
        return Err(MatrixError::NotSquare {
            op: "partition",
            rows: m.rows(),
            cols: m.cols(),
        }
        .into());
    }
    match mode {
        PartitionMode::DiagonalSplit => PartitionedProblem::new(
            DiagonalMatrix::new(m.diagonal()),
            m.without_diagonal(),
            c64(1.0),
        ),
    }
}

/// `θ[n][m] = 1/(ϵ_n - ϵ_m)` for `m ≠ n`, zero on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GapMatrix {
    theta: DenseMatrix,
}

impl GapMatrix {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.theta
    }

    pub fn row(&self, n: usize) -> &[C64] {
        self.theta.row(n)
    }

    pub fn size(&self) -> usize {
        self.theta.rows()
    }
}

fn spectral_scale(d: &DiagonalMatrix) -> f64 {
    d.entries().iter().fold(1.0f64, |m, e| m.max(e.norm()))
}

pub fn build_theta(d: &DiagonalMatrix) -> Result<GapMatrix, PartitionError> {
    build_theta_with_tol(d, DEGENERACY_TOL)
}

pub fn build_theta_with_tol(d: &DiagonalMatrix, tol: f64) -> Result<GapMatrix, PartitionError> {
    let n = d.size();
    let threshold = tol * spectral_scale(d);
    let mut theta = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let gap = d[i] - d[j];
            if gap.norm() < threshold {
                return Err(PartitionError::DegenerateSpectrum {
                    i: i.min(j),
                    j: i.max(j),
                    gap: gap.norm(),
                });
            }
            theta[(i, j)] = gap.inv();
        }
    }
    Ok(GapMatrix { theta })
}

/// Row `n` of the gap matrix, computed in O(N) without forming `θ`.
pub fn gap_row(d: &DiagonalMatrix, n: usize, tol: f64) -> Result<Vec<C64>, PartitionError> {
    let threshold = tol * spectral_scale(d);
    let en = d[n];
    d.entries()
        .iter()
        .enumerate()
        .map(|(m, &em)| {
            if m == n {
                return Ok(C64::new(0.0, 0.0));
            }
            let gap = en - em;
            if gap.norm() < threshold {
                Err(PartitionError::DegenerateSpectrum {
                    i: n.min(m),
                    j: n.max(m),
                    gap: gap.norm(),
                })
            } else {
                Ok(gap.inv())
            }
        })
        .collect()
}

/// `φ_{2n}(0)` for `n = 0..count`, by the ratio recurrence
/// `φ_{2n}(0) = -φ_{2n-2}(0) √((2n-1)/(2n))`, `φ_0(0) = π^{-1/4}`.
pub fn hermite_functions_at_zero(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut phi = libm::pow(core::f64::consts::PI, -0.25);
    for n in 0..count {
        if n > 0 {
            let k = n as f64;
            phi = -phi * libm::sqrt((2.0 * k - 1.0) / (2.0 * k));
        }
        out.push(phi);
    }
    out
}

/// Even-parity sector of the harmonic oscillator perturbed by a δ-potential
/// at the origin: `ϵ_n = 2n + 1/2`, `Δ = v v'` with `v_n = φ_{2n}(0)`.
pub fn build_oscillator(n_basis: usize) -> Result<PartitionedProblem, PartitionError> {
    if n_basis == 0 {
        return Err(PartitionError::EmptyProblem);
    }
    let v = hermite_functions_at_zero(n_basis);
    let d = DiagonalMatrix::new((0..n_basis).map(|n| c64(2.0 * n as f64 + 0.5)).collect());
    let delta = DenseMatrix::from_fn(n_basis, n_basis, |i, j| c64(v[i] * v[j]));
    PartitionedProblem::new(d, Matrix::Dense(delta), c64(1.0))
}

/// `D = diag(1..=N)` and a dense nonsymmetric `Δ` with i.i.d. entries
/// uniform on `[-1, 1]`, drawn from the [`Stream::UniformPerturbation`]
/// stream.
pub fn build_random_uniform(n: usize, seed: u64) -> Result<PartitionedProblem, PartitionError> {
    if n == 0 {
        return Err(PartitionError::EmptyProblem);
    }
    let d = DiagonalMatrix::new((1..=n).map(|k| c64(k as f64)).collect());
    PartitionedProblem::new(d, Matrix::Dense(uniform_matrix(n, seed, 1.0)), c64(1.0))
}

fn uniform_matrix(n: usize, seed: u64, scale: f64) -> DenseMatrix {
    let mut rng = rng::stream(seed, Stream::UniformPerturbation);
    DenseMatrix::from_fn(n, n, |_, _| c64(scale * rng.random_range(-1.0..=1.0)))
}

/// Laplacian of a critical Erdős–Rényi graph: `n` vertices and exactly `n`
/// distinct undirected edges sampled uniformly without replacement.
pub fn build_er_laplacian(n: usize, seed: u64) -> Result<SparseMatrix, PartitionError> {
    if n < 3 {
        return Err(PartitionError::TooFewVertices { n });
    }
    let mut rng = rng::stream(seed, Stream::ErdosRenyiEdges);
    let mut edges = BTreeSet::new();
    let mut order = Vec::with_capacity(n);
    while edges.len() < n {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let e = (i.min(j), i.max(j));
        if edges.insert(e) {
            order.push(e);
        }
    }
    let mut degree = vec![0usize; n];
    let mut triplets = Vec::with_capacity(3 * n);
    for &(i, j) in &order {
        degree[i] += 1;
        degree[j] += 1;
        triplets.push((i, j, c64(-1.0)));
        triplets.push((j, i, c64(-1.0)));
    }
    for (i, &deg) in degree.iter().enumerate() {
        if deg > 0 {
            triplets.push((i, i, c64(deg as f64)));
        }
    }
    Ok(SparseMatrix::from_triplets(n, n, triplets)?)
}

/// Random perturbation families for the timing and dominant-eigenpair runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenchFamily {
    /// Dense nonsymmetric uniform entries on `[-scale, scale]`.
    DenseUniform { scale: f64 },
    /// Sparse critical Erdős–Rényi Laplacian.
    ErLaplacian,
}

/// Oscillator diagonal `2n + 1/2` perturbed by `λ R`, split Epstein–Nesbet
/// style: the diagonal of `λ R` is moved into `D` so `Δ` has zero diagonal.
pub fn build_benchmark(
    family: BenchFamily,
    n: usize,
    seed: u64,
    lambda: C64,
) -> Result<PartitionedProblem, PartitionError> {
    if n == 0 {
        return Err(PartitionError::EmptyProblem);
    }
    let d = DiagonalMatrix::new((0..n).map(|k| c64(2.0 * k as f64 + 0.5)).collect());
    let delta = match family {
        BenchFamily::DenseUniform { scale } => Matrix::Dense(uniform_matrix(n, seed, scale)),
        BenchFamily::ErLaplacian => Matrix::Sparse(build_er_laplacian(n, seed)?),
    };
    Ok(PartitionedProblem::new(d, delta, lambda)?.to_epstein_nesbet())
}
