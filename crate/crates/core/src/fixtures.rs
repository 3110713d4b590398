//! Small fixtures with closed-form or tabulated answers.
//!
//! The boundary polynomials `P(λ, μ)` vanish exactly when `μ` is a
//! multiplier of a fixed point of the single-row map at `λ`. The 3×3 tables
//! are stored as `(coefficient, deg λ, deg μ)` with the integer coefficients
//! copied verbatim.

use crate::matrix::{DenseMatrix, DiagonalMatrix, Matrix};
use crate::partition::PartitionedProblem;
use crate::{c64, C64};

/// Version of the embedded polynomial tables.
pub const POLYNOMIAL_TABLE_VERSION: u32 = 1;

/// `D = diag(0, 1)`, `Δ = [[0, 1], [1, 0]]`.
pub fn two_by_two(lambda: C64) -> PartitionedProblem {
    PartitionedProblem {
        d: DiagonalMatrix::from_real(&[0.0, 1.0]),
        delta: Matrix::Dense(DenseMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")),
        lambda,
    }
}

/// `(ε_-, ε_+) = ((1 - √(1+4λ²))/2, (1 + √(1+4λ²))/2)`, principal root, so
/// `ε_-` continues `ϵ_1 = 0` for `|λ| < 1/2`.
pub fn two_by_two_eigenvalues(lambda: C64) -> (C64, C64) {
    let root = (c64(1.0) + lambda * lambda * 4.0).sqrt();
    ((c64(1.0) - root) / 2.0, (c64(1.0) + root) / 2.0)
}

/// `D = diag(0, 1, 3)`, `Δ = [[0, 1, 2], [1, 0, 3], [2, 3, 0]]`.
pub fn three_by_three(lambda: C64) -> PartitionedProblem {
    PartitionedProblem {
        d: DiagonalMatrix::from_real(&[0.0, 1.0, 3.0]),
        delta: Matrix::Dense(
            DenseMatrix::from_real(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 2.0, 3.0, 0.0]).expect("3x3"),
        ),
        lambda,
    }
}

/// Monomials `(coefficient, deg λ, deg μ)`.
pub type Monomials = &'static [(i64, u32, u32)];

/// `4λ² + 2μ - μ²`, the same curve for both rows of the 2×2 fixture.
pub const TWO_BY_TWO_CURVE: Monomials = &[(4, 2, 0), (2, 0, 1), (-1, 0, 2)];

/// Row 0 of the 3×3 fixture.
pub const THREE_BY_THREE_ROW0: Monomials = &[
    (63792, 7, 0),
    (-28352, 6, 1),
    (-68040, 6, 0),
    (-29556, 5, 2),
    (89352, 5, 1),
    (-13239, 5, 0),
    (960, 4, 3),
    (14516, 4, 2),
    (-39164, 4, 1),
    (12116, 4, 0),
    (5616, 3, 4),
    (-26658, 3, 3),
    (29988, 3, 2),
    (-546, 3, 1),
    (-2448, 3, 0),
    (468, 2, 5),
    (-3720, 2, 4),
    (12820, 2, 3),
    (-17648, 2, 2),
    (7584, 2, 1),
    (-1296, 2, 0),
    (-243, 1, 6),
    (1404, 1, 5),
    (-2619, 1, 4),
    (1350, 1, 3),
    (432, 1, 2),
    (108, 0, 6),
    (-792, 0, 5),
    (1980, 0, 4),
    (-1872, 0, 3),
    (432, 0, 2),
];

/// Row 1 of the 3×3 fixture.
pub const THREE_BY_THREE_ROW1: Monomials = &[
    (113408, 7, 0),
    (-63792, 6, 1),
    (-120960, 6, 0),
    (7416, 5, 2),
    (53208, 5, 1),
    (36424, 5, 0),
    (6525, 4, 3),
    (-11034, 4, 2),
    (-13824, 4, 1),
    (-5664, 4, 0),
    (-3156, 3, 4),
    (-2472, 3, 3),
    (10332, 3, 2),
    (3696, 3, 1),
    (3088, 3, 0),
    (-72, 2, 5),
    (1800, 2, 4),
    (-1800, 2, 3),
    (-2088, 2, 2),
    (-1296, 2, 1),
    (-576, 2, 0),
    (128, 1, 6),
    (-24, 1, 5),
    (-736, 1, 4),
    (-120, 1, 3),
    (1328, 1, 2),
    (-72, 0, 6),
    (108, 0, 5),
    (360, 0, 4),
    (-432, 0, 3),
    (-288, 0, 2),
];

/// Row 2 of the 3×3 fixture.
pub const THREE_BY_THREE_ROW2: Monomials = &[
    (35440, 7, 0),
    (-42528, 6, 1),
    (-37800, 6, 0),
    (-32360, 5, 2),
    (110080, 5, 1),
    (-23295, 5, 0),
    (29112, 4, 3),
    (-4800, 4, 2),
    (-88614, 4, 1),
    (51024, 4, 0),
    (14640, 3, 4),
    (-78760, 3, 3),
    (116760, 3, 2),
    (-52920, 3, 1),
    (5400, 3, 0),
    (-2376, 2, 5),
    (-10152, 2, 4),
    (70296, 2, 3),
    (-101496, 2, 2),
    (41904, 2, 1),
    (-864, 2, 0),
    (-1080, 1, 6),
    (7920, 1, 5),
    (-19620, 1, 4),
    (19440, 1, 3),
    (-6480, 1, 2),
    (1296, 0, 6),
    (-7992, 0, 5),
    (17712, 0, 4),
    (-16416, 0, 3),
    (5184, 0, 2),
];

/// Table for row `n` of the 3×3 fixture.
pub fn three_by_three_curve(n: usize) -> Option<Monomials> {
    match n {
        0 => Some(THREE_BY_THREE_ROW0),
        1 => Some(THREE_BY_THREE_ROW1),
        2 => Some(THREE_BY_THREE_ROW2),
        _ => None,
    }
}
