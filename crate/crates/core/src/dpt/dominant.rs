use alloc::vec::Vec;

use super::driver::iterate_single;
use super::{DptError, IterationOptions, Status};
use crate::matrix::norm2;
use crate::partition::{PartitionError, PartitionedProblem, DEGENERACY_TOL};
use crate::C64;

/// Eigenpair continued from the unperturbed state with the largest real part.
#[derive(Debug, Clone, PartialEq)]
pub struct DominantEigenpair {
    /// `n* = argmax_n Re ϵ_n`.
    pub index: usize,
    /// Eigenvector with entry `n*` equal to 1.
    pub chart_vector: Vec<C64>,
    /// Same vector scaled to unit 2-norm.
    pub unit_vector: Vec<C64>,
    pub eigenvalue: C64,
    pub residual: f64,
    pub iterations: usize,
    pub status: Status,
    pub step_norm: f64,
}

/// Index of the largest `Re ϵ_n`, rejecting ties within the degeneracy
/// tolerance.
pub(crate) fn dominant_index(p: &PartitionedProblem) -> Result<usize, DptError> {
    let d = p.d.entries();
    if d.is_empty() {
        return Err(PartitionError::EmptyProblem.into());
    }
    let scale = d.iter().fold(1.0f64, |m, e| m.max(e.norm()));
    let mut best = 0;
    for (i, e) in d.iter().enumerate() {
        if e.re > d[best].re {
            best = i;
        }
    }
    for (i, e) in d.iter().enumerate() {
        if i != best && (d[best].re - e.re) < DEGENERACY_TOL * scale {
            return Err(PartitionError::DegenerateSpectrum {
                i: i.min(best),
                j: i.max(best),
                gap: d[best].re - e.re,
            }
            .into());
        }
    }
    Ok(best)
}

/// Iterates only the single-vector map `F_{n*}`; cost per step is one
/// product with `Δ` plus O(N).
pub fn dominant_eigenpair(
    p: &PartitionedProblem,
    opts: &IterationOptions,
) -> Result<DominantEigenpair, DptError> {
    let index = dominant_index(p)?;
    let rep = iterate_single(p, index, opts)?;
    let chart_vector = rep.iterate.a.row(0).to_vec();
    let norm = norm2(&chart_vector);
    let unit_vector = chart_vector.iter().map(|z| z / norm).collect();
    Ok(DominantEigenpair {
        index,
        chart_vector,
        unit_vector,
        eigenvalue: rep.eigenvalues[0],
        residual: rep.residuals[0],
        iterations: rep.iterations,
        status: rep.status,
        step_norm: rep.step_norm,
    })
}
