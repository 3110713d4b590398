//! Direct dense solves for small systems (homotopy rebasing, Newton steps,
//! Rayleigh-quotient baselines).

use alloc::vec::Vec;

use crate::matrix::{DenseMatrix, MatrixError};
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("matrix is singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &DenseMatrix) -> Result<Self, SolveError> {
        if !a.is_square() {
            return Err(MatrixError::NotSquare {
                op: "lu",
                rows: a.rows(),
                cols: a.cols(),
            }
            .into());
        }
        let n = a.rows();
        let scale = a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
                .expect("k < n");
            let pivot = lu[(p, k)];
            if pivot.norm() <= f64::EPSILON * scale * (n as f64) || pivot.norm() == 0.0 {
                return Err(SolveError::Singular { pivot: k });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.rows();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.lu.rows();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = alloc::vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e.fill(C64::new(0.0, 0.0));
            e[j] = C64::new(1.0, 0.0);
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

pub fn solve(a: &DenseMatrix, b: &[C64]) -> Result<Vec<C64>, SolveError> {
    if b.len() != a.rows() {
        return Err(MatrixError::ShapeMismatch {
            op: "solve",
            left: a.shape(),
            right: (b.len(), 1),
        }
        .into());
    }
    Ok(Lu::new(a)?.solve(b))
}

pub fn inverse(a: &DenseMatrix) -> Result<DenseMatrix, SolveError> {
    Ok(Lu::new(a)?.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn inverse_roundtrip() {
        let a = DenseMatrix::from_vec(
            3,
            3,
            alloc::vec![
                c64(0.0),
                c64(2.0),
                C64::new(1.0, 1.0),
                c64(1.0),
                c64(1.0),
                c64(0.0),
                c64(3.0),
                C64::new(0.0, -2.0),
                c64(1.0),
            ],
        )
        .unwrap();
        let inv = inverse(&a).unwrap();
        let prod = a.matmul(&inv).unwrap();
        assert!(prod.max_abs_diff(&DenseMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn singular_is_reported() {
        let a = DenseMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(inverse(&a), Err(SolveError::Singular { .. })));
    }
}
