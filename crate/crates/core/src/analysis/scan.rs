use alloc::vec;
use alloc::vec::Vec;

use crate::dpt::{iterate_from, DptError, IterationOptions, Mode, Status};
use crate::matrix::DenseMatrix;
use crate::partition::{gap_row, PartitionedProblem, DEGENERACY_TOL};
use crate::dpt::EigenIterate;
use crate::C64;

/// Per-cell iteration budget used by the λ-plane scans.
pub const SCAN_MAX_ITER: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellClass {
    Converged,
    BoundedNonConverged,
    Diverged,
}

impl CellClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CellClass::Converged => "converged",
            CellClass::BoundedNonConverged => "bounded",
            CellClass::Diverged => "diverged",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "converged" => Some(CellClass::Converged),
            "bounded" => Some(CellClass::BoundedNonConverged),
            "diverged" => Some(CellClass::Diverged),
            _ => None,
        }
    }
}

impl From<Status> for CellClass {
    fn from(s: Status) -> Self {
        match s {
            Status::Converged => CellClass::Converged,
            Status::Diverged => CellClass::Diverged,
            Status::BoundedNonConverged | Status::MaxIterations => CellClass::BoundedNonConverged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub class: CellClass,
    /// Iterations performed (to convergence, escape, or the budget).
    pub iterations: usize,
    /// Escape step for divergent cells.
    pub escape: Option<usize>,
}

/// Rectangle `[re_min, re_max) × (im_min, im_max]` sampled at the lower-left
/// corners of `res_re × res_im` pixels, top row first. With symmetric ranges
/// and even resolutions both axes are sampled exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub res_re: usize,
    pub res_im: usize,
}

impl GridSpec {
    /// Square grid `[-half, half)²` with `res × res` cells.
    pub fn square(half: f64, res: usize) -> Self {
        Self {
            re_min: -half,
            re_max: half,
            im_min: -half,
            im_max: half,
            res_re: res,
            res_im: res,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.res_re * self.res_im
    }

    pub fn re_at(&self, col: usize) -> f64 {
        self.re_min + (self.re_max - self.re_min) * (col as f64 / self.res_re as f64)
    }

    pub fn im_at(&self, row: usize) -> f64 {
        self.im_max - (self.im_max - self.im_min) * (row as f64 / self.res_im as f64)
    }

    pub fn pixel_re(&self) -> f64 {
        (self.re_max - self.re_min) / self.res_re as f64
    }

    pub fn pixel_im(&self) -> f64 {
        (self.im_max - self.im_min) / self.res_im as f64
    }

    /// λ of the cell at row-major `index`.
    pub fn lambda_at(&self, index: usize) -> C64 {
        C64::new(self.re_at(index % self.res_re), self.im_at(index / self.res_re))
    }

    pub fn validate(&self) -> Result<(), DptError> {
        if self.res_re == 0 || self.res_im == 0 {
            return Err(DptError::InvalidOption("grid resolution must be positive"));
        }
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|x| x.is_finite());
        if !finite || !(self.re_max > self.re_min) || !(self.im_max > self.im_min) {
            return Err(DptError::InvalidOption("grid ranges must be finite and nonempty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainGrid {
    pub spec: GridSpec,
    /// Row-major, top row (largest imaginary part) first.
    pub cells: Vec<Cell>,
}

impl DomainGrid {
    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.cells[row * self.spec.res_re + col]
    }
}

/// Which iteration a scan runs at every λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanMode {
    Full,
    Row(usize),
    /// `λ_k = λ (1 - α^k)` on the full map (`row = None`) or one row.
    Ramped { alpha: f64, row: Option<usize> },
}

impl ScanMode {
    fn mode(self) -> Mode {
        match self {
            ScanMode::Full | ScanMode::Ramped { row: None, .. } => Mode::Full,
            ScanMode::Row(n) | ScanMode::Ramped { row: Some(n), .. } => Mode::Row(n),
        }
    }

    fn ramp(self) -> Option<f64> {
        match self {
            ScanMode::Ramped { alpha, .. } => Some(alpha),
            _ => None,
        }
    }
}

/// Starting iterate and gap rows shared by every cell of a scan.
pub struct ScanSetup {
    start: EigenIterate,
    gaps: DenseMatrix,
}

pub fn prepare_scan(p: &PartitionedProblem, mode: ScanMode) -> Result<ScanSetup, DptError> {
    let (start, gaps) = mode.mode().setup(p)?;
    Ok(ScanSetup { start, gaps })
}

/// Classifies a single λ.
pub fn scan_cell(
    p: &PartitionedProblem,
    mode: ScanMode,
    lambda: C64,
    opts: &IterationOptions,
) -> Result<Cell, DptError> {
    let setup = prepare_scan(p, mode)?;
    run_cell(p, &setup, mode, lambda, opts)
}

pub fn run_cell(
    p: &PartitionedProblem,
    setup: &ScanSetup,
    mode: ScanMode,
    lambda: C64,
    opts: &IterationOptions,
) -> Result<Cell, DptError> {
    let q = p.with_lambda(lambda);
    let rep = iterate_from(&q, &setup.gaps, setup.start.clone(), mode.ramp(), opts)?;
    Ok(Cell {
        class: rep.status.into(),
        iterations: rep.iterations,
        escape: rep.escape_iteration,
    })
}

/// Classifies every grid cell in row-major order. `p.lambda` is replaced by
/// the cell's λ.
pub fn scan_domain(
    p: &PartitionedProblem,
    spec: &GridSpec,
    mode: ScanMode,
    opts: &IterationOptions,
) -> Result<DomainGrid, DptError> {
    spec.validate()?;
    let setup = prepare_scan(p, mode)?;
    let cells = (0..spec.cell_count())
        .map(|i| run_cell(p, &setup, mode, spec.lambda_at(i), opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DomainGrid { spec: *spec, cells })
}

/// Options for a scan built from the crate defaults with the scan budget.
pub fn scan_options() -> IterationOptions {
    IterationOptions {
        max_iter: SCAN_MAX_ITER,
        ..IterationOptions::default()
    }
}

/// Real-λ orbit diagram of coordinate `coord` of row `n`: for each of
/// `samples` evenly spaced λ in `[lo, hi]`, discards `transient` steps of
/// the single-row map from `e_n`, then records `keep` values. Escaping
/// orbits give an empty list.
pub fn bifurcation_scan(
    p: &PartitionedProblem,
    n: usize,
    coord: usize,
    lo: f64,
    hi: f64,
    samples: usize,
    transient: usize,
    keep: usize,
) -> Result<Vec<(f64, Vec<C64>)>, DptError> {
    let dim = p.n();
    if n >= dim || coord >= dim {
        return Err(DptError::InvalidOption("row or coordinate out of range"));
    }
    if !(lo.is_finite() && hi.is_finite()) || samples == 0 {
        return Err(DptError::InvalidOption("bifurcation interval must be finite and sampled"));
    }
    let gaps = gap_row(&p.d, n, DEGENERACY_TOL)?;
    let threshold = IterationOptions::default().divergence_threshold;
    let mut out = Vec::with_capacity(samples);
    let mut z = vec![C64::new(0.0, 0.0); dim];
    let mut next = z.clone();
    let mut dz = z.clone();
    for i in 0..samples {
        let lambda = if samples == 1 {
            lo
        } else {
            lo + (hi - lo) * (i as f64 / (samples - 1) as f64)
        };
        let lam = C64::new(lambda, 0.0);
        z.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        z[n] = C64::new(1.0, 0.0);
        let mut values = Vec::with_capacity(keep);
        let mut escaped = false;
        for step in 0..transient + keep {
            p.delta.matvec_into(&z, &mut dz);
            crate::dpt::apply_row(&z, &dz, n, &gaps, lam, &mut next);
            core::mem::swap(&mut z, &mut next);
            if z.iter().any(|x| !(x.norm() <= threshold)) {
                escaped = true;
                break;
            }
            if step >= transient {
                values.push(z[coord]);
            }
        }
        if escaped {
            values.clear();
        }
        out.push((lambda, values));
    }
    Ok(out)
}
