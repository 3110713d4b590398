use alloc::vec;
use alloc::vec::Vec;

use super::map::apply_row;
use super::{ConvergenceReport, DptError, EigenIterate, IterationOptions, Status, TraceRecord};
use crate::matrix::{norm_inf, DenseMatrix};
use crate::partition::{build_theta, gap_row, GapMatrix, PartitionedProblem, DEGENERACY_TOL};
use crate::C64;

/// Which rows of `A` are iterated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// All `N` rows, starting from the identity.
    Full,
    /// The single row `n`, starting from `e_n`.
    Row(usize),
}

impl Mode {
    /// Starting iterate and the matching gap rows.
    pub fn setup(
        self,
        p: &PartitionedProblem,
    ) -> Result<(EigenIterate, DenseMatrix), DptError> {
        let n = p.n();
        match self {
            Mode::Full => {
                let theta = build_theta(&p.d)?;
                Ok((EigenIterate::identity(n), theta.matrix().clone()))
            }
            Mode::Row(row) => {
                if row >= n {
                    return Err(DptError::InvalidOption("row index out of range"));
                }
                let gaps = DenseMatrix::from_vec(1, n, gap_row(&p.d, row, DEGENERACY_TOL)?)?;
                Ok((EigenIterate::unit(n, row), gaps))
            }
        }
    }
}

/// Eigenvalues `ϵ_n + λ(Δz)^n` and residuals `‖Mz - εz‖∞ / ‖z‖∞` for every
/// row of the iterate.
pub fn residuals(p: &PartitionedProblem, it: &EigenIterate) -> (Vec<C64>, Vec<f64>) {
    let dim = p.n();
    let mut dz = vec![C64::new(0.0, 0.0); dim];
    let mut eig = Vec::with_capacity(it.charts.len());
    let mut res = Vec::with_capacity(it.charts.len());
    for (i, &n) in it.charts.iter().enumerate() {
        let z = it.a.row(i);
        p.delta.matvec_into(z, &mut dz);
        let e = p.d[n] + p.lambda * dz[n];
        let mut worst = 0.0f64;
        for m in 0..dim {
            let r = p.d[m] * z[m] + p.lambda * dz[m] - e * z[m];
            worst = worst.max(r.norm());
        }
        let scale = norm_inf(z);
        eig.push(e);
        res.push(if scale > 0.0 { worst / scale } else { f64::INFINITY });
    }
    (eig, res)
}

/// Step-norm history used to separate stalled orbits from slow convergence.
struct StepHistory {
    ring: Vec<f64>,
    len: usize,
    pos: usize,
}

impl StepHistory {
    fn new(window: usize) -> Self {
        Self {
            ring: vec![f64::INFINITY; 2 * window],
            len: 0,
            pos: 0,
        }
    }

    fn push(&mut self, s: f64) {
        self.ring[self.pos] = s;
        self.pos = (self.pos + 1) % self.ring.len();
        self.len = (self.len + 1).min(self.ring.len());
    }

    /// True when the minimum step over the latest window is clearly below
    /// the minimum over the window before it.
    fn still_contracting(&self) -> bool {
        let w = self.ring.len() / 2;
        if self.len < self.ring.len() {
            return true;
        }
        let at = |back: usize| self.ring[(self.pos + self.ring.len() - 1 - back) % self.ring.len()];
        let recent = (0..w).map(at).fold(f64::INFINITY, f64::min);
        let earlier = (w..2 * w).map(at).fold(f64::INFINITY, f64::min);
        recent < 0.9 * earlier
    }
}

/// Generic driver: iterates the rows of `start` (row `i` in chart
/// `start.charts[i]`, with gap row `gaps.row(i)`).
///
/// With `ramp = Some(α)` step `k` uses `λ (1 - α^k)` (`k` from 0) and the
/// convergence test is armed only once `α^k < tol`.
pub fn iterate_from(
    p: &PartitionedProblem,
    gaps: &DenseMatrix,
    start: EigenIterate,
    ramp: Option<f64>,
    opts: &IterationOptions,
) -> Result<ConvergenceReport, DptError> {
    opts.validate()?;
    let dim = p.n();
    let rows = start.charts.len();
    if start.a.shape() != (rows, dim) || gaps.shape() != (rows, dim) {
        return Err(DptError::InvalidOption("iterate and gap rows disagree in shape"));
    }
    if let Some(alpha) = ramp {
        if !(0.0..1.0).contains(&alpha) {
            return Err(DptError::InvalidOption("ramp alpha must lie in [0, 1)"));
        }
    }
    for (i, &n) in start.charts.iter().enumerate() {
        if start.a[(i, n)] != crate::c64(1.0) {
            return Err(DptError::ChartViolated {
                n,
                value: start.a[(i, n)],
            });
        }
    }

    let charts = start.charts;
    let mut a = start.a;
    let mut next = DenseMatrix::zeros(rows, dim);
    let mut dz = vec![C64::new(0.0, 0.0); dim];
    let window = opts.cycle_window.min((opts.max_iter / 2).max(1));
    let mut history = StepHistory::new(window);
    let mut trace = Vec::new();
    let mut prev_eigs: Option<Vec<C64>> = None;
    let mut step_norm = f64::INFINITY;
    let mut status = None;
    let mut escape = None;
    let mut k = start.k;
    let mut final_check: Option<(Vec<C64>, Vec<f64>)> = None;

    for j in 0..opts.max_iter {
        let lambda_k = match ramp {
            Some(alpha) => p.lambda * (1.0 - libm::pow(alpha, j as f64)),
            None => p.lambda,
        };
        step_norm = 0.0;
        for i in 0..rows {
            let z = a.row(i);
            p.delta.matvec_into(z, &mut dz);
            let s = apply_row(z, &dz, charts[i], gaps.row(i), lambda_k, next.row_mut(i));
            step_norm = step_norm.max(s);
        }
        core::mem::swap(&mut a, &mut next);
        k += 1;

        let size = a.max_abs();
        if !(size <= opts.divergence_threshold) || !step_norm.is_finite() {
            status = Some(Status::Diverged);
            escape = Some(k);
            break;
        }
        history.push(step_norm);

        let armed = match ramp {
            Some(alpha) => p.lambda == C64::new(0.0, 0.0) || libm::pow(alpha, j as f64) < opts.tol,
            None => true,
        };
        let small_step = armed && step_norm <= opts.tol * size.max(1.0);
        let need_check = small_step || opts.trace;
        if need_check {
            let it = EigenIterate {
                a: a.clone(),
                charts: charts.clone(),
                k,
            };
            let (eigs, res) = residuals(p, &it);
            if opts.trace {
                let change = prev_eigs.as_ref().map_or(f64::INFINITY, |prev| {
                    prev.iter()
                        .zip(&eigs)
                        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
                });
                trace.push(TraceRecord {
                    k,
                    step_norm,
                    max_residual: res.iter().fold(0.0f64, |m, &r| m.max(r)),
                    eigenvalue_change: change,
                });
                prev_eigs = Some(eigs.clone());
            }
            if small_step && res.iter().all(|&r| r < opts.residual_tol) {
                status = Some(Status::Converged);
                final_check = Some((eigs, res));
                break;
            }
        }
    }

    let status = status.unwrap_or(if history.still_contracting() {
        Status::MaxIterations
    } else {
        Status::BoundedNonConverged
    });
    let iterate = EigenIterate { a, charts, k };
    let (eigenvalues, residuals) = match final_check {
        Some(pair) => pair,
        None => residuals(p, &iterate),
    };
    Ok(ConvergenceReport {
        iterate,
        eigenvalues,
        status,
        iterations: k,
        residuals,
        step_norm,
        escape_iteration: escape,
        trace,
    })
}

/// Iterates the full map from `A = I` until convergence, escape or the
/// iteration budget.
pub fn iterate_full(
    p: &PartitionedProblem,
    opts: &IterationOptions,
) -> Result<ConvergenceReport, DptError> {
    let (start, gaps) = Mode::Full.setup(p)?;
    iterate_from(p, &gaps, start, None, opts)
}

/// Iterates the single-row map `F_n` from `e_n`.
pub fn iterate_single(
    p: &PartitionedProblem,
    n: usize,
    opts: &IterationOptions,
) -> Result<ConvergenceReport, DptError> {
    let (start, gaps) = Mode::Row(n).setup(p)?;
    iterate_from(p, &gaps, start, None, opts)
}

/// Nonautonomous iteration with `λ_k = λ (1 - α^k)`.
pub fn iterate_ramped(
    p: &PartitionedProblem,
    alpha: f64,
    mode: Mode,
    opts: &IterationOptions,
) -> Result<ConvergenceReport, DptError> {
    let (start, gaps) = mode.setup(p)?;
    iterate_from(p, &gaps, start, Some(alpha), opts)
}

/// `F^{∘k}(I)` with no convergence control.
pub fn iterate_fixed_steps(
    p: &PartitionedProblem,
    theta: &GapMatrix,
    k: usize,
) -> Result<DenseMatrix, DptError> {
    let mut a = DenseMatrix::identity(p.n());
    for _ in 0..k {
        a = super::step_full(&a, theta, &p.delta, p.lambda)?;
    }
    Ok(a)
}
