use alloc::boxed::Box;

use super::driver::{iterate_full, residuals};
use super::{ConvergenceReport, DptError, EigenIterate, IterationOptions, Status};
use crate::linalg::Lu;
use crate::matrix::{DenseMatrix, DiagonalMatrix, Matrix};
use crate::partition::PartitionedProblem;
use crate::{c64, C64};

/// Splits the perturbation into `q` equal pieces `λ/q`.
///
/// Each stage solves `diag(ε) + (λ/q) Δ̃` in the current eigenbasis, with the
/// diagonal of `Δ̃` moved into `D`. The converged eigenvectors `V` (columns)
/// then rebase the remaining perturbation, `Δ̃ ← V⁻¹ Δ̃ V`, and accumulate
/// into `V_total`. The final report holds the chart-normalized columns of
/// `V_total` with residuals measured against the original problem.
pub fn homotopy_solve(
    p: &PartitionedProblem,
    q: usize,
    opts: &IterationOptions,
) -> Result<ConvergenceReport, DptError> {
    if q == 0 {
        return Err(DptError::InvalidOption("homotopy needs at least one stage"));
    }
    if q == 1 {
        return iterate_full(p, opts);
    }
    let n = p.n();
    let step = p.lambda / q as f64;
    let mut eps = p.d.clone();
    let mut delta = p.delta.to_dense();
    let mut v_total = DenseMatrix::identity(n);
    let mut iterations = 0;
    let mut step_norm = 0.0;

    for stage in 1..=q {
        let sub = PartitionedProblem::new(eps.clone(), Matrix::Dense(delta.clone()), step)?
            .to_epstein_nesbet();
        let rep = iterate_full(&sub, opts)?;
        iterations += rep.iterations;
        step_norm = rep.step_norm;
        if rep.status != Status::Converged {
            return Err(DptError::StageFailed {
                stage,
                stages: q,
                status: rep.status,
                partial: Box::new(rep),
            });
        }
        eps = DiagonalMatrix::new(rep.eigenvalues.clone());
        let v = rep.iterate.a.transpose();
        v_total = v_total.matmul(&v)?;
        if stage < q {
            let lu = Lu::new(&v)?;
            delta = lu.inverse().matmul(&delta.matmul(&v)?)?;
        }
    }

    let iterate = chart_normalized_columns(&v_total);
    let (eigenvalues, res) = residuals(p, &iterate);
    let status = if res.iter().all(|&r| r < opts.residual_tol) {
        Status::Converged
    } else {
        Status::BoundedNonConverged
    };
    Ok(ConvergenceReport {
        iterate,
        eigenvalues,
        status,
        iterations,
        residuals: res,
        step_norm,
        escape_iteration: None,
        trace: alloc::vec::Vec::new(),
    })
}

/// Rows of the result are the columns of `v`, each scaled so its entry `j`
/// (or, if that vanishes, its largest entry) is exactly 1.
fn chart_normalized_columns(v: &DenseMatrix) -> EigenIterate {
    let n = v.rows();
    let mut a = v.transpose();
    let mut charts = alloc::vec::Vec::with_capacity(n);
    for j in 0..n {
        let row = a.row_mut(j);
        let mut chart = j;
        if row[j].norm() < 1e-8 * crate::matrix::norm_inf(row) {
            chart = (0..n)
                .max_by(|&x, &y| row[x].norm().total_cmp(&row[y].norm()))
                .unwrap_or(j);
        }
        let pivot: C64 = row[chart];
        for z in row.iter_mut() {
            *z /= pivot;
        }
        row[chart] = c64(1.0);
        charts.push(chart);
    }
    EigenIterate { a, charts, k: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, two_by_two_eigenvalues};

    #[test]
    fn single_stage_is_plain_iteration() {
        let p = fixtures::three_by_three(c64(0.2));
        let opts = IterationOptions::default();
        assert_eq!(homotopy_solve(&p, 1, &opts).unwrap(), iterate_full(&p, &opts).unwrap());
        assert!(homotopy_solve(&p, 0, &opts).is_err());
    }

    #[test]
    fn staged_solve_beyond_direct_divergence() {
        let lambda = c64(1.2);
        let p = fixtures::two_by_two(lambda);
        let opts = IterationOptions::default();
        assert_ne!(iterate_full(&p, &opts).unwrap().status, Status::Converged);
        let rep = homotopy_solve(&p, 4, &opts).unwrap();
        assert_eq!(rep.status, Status::Converged);
        let (minus, plus) = two_by_two_eigenvalues(lambda);
        assert!((rep.eigenvalues[0] - minus).norm() < 1e-8);
        assert!((rep.eigenvalues[1] - plus).norm() < 1e-8);
    }

    #[test]
    fn diagonal_input_keeps_identity() {
        let p = PartitionedProblem::new(
            DiagonalMatrix::from_real(&[0.0, 2.0, 5.0]),
            Matrix::Dense(DenseMatrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0]).unwrap()),
            c64(0.3),
        )
        .unwrap();
        let rep = homotopy_solve(&p, 3, &IterationOptions::default()).unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert!(rep.iterate.a.max_abs_diff(&DenseMatrix::identity(3)) < 1e-15);
        assert!((rep.eigenvalues[2] - c64(5.6)).norm() < 1e-14);
    }

    #[test]
    fn failed_stage_carries_partial_report() {
        let p = fixtures::two_by_two(c64(4.0));
        let err = homotopy_solve(&p, 2, &IterationOptions::default()).unwrap_err();
        match err {
            DptError::StageFailed { stage, stages, partial, .. } => {
                assert_eq!((stage, stages), (1, 2));
                assert_ne!(partial.status, Status::Converged);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
