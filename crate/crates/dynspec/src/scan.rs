//! Parallel λ-plane scans and bifurcation dumps.

use std::io::Write;

use dynspec_core::analysis::{prepare_scan, run_cell, DomainGrid, GridSpec, ScanMode};
use dynspec_core::dpt::DptError;
use dynspec_core::{IterationOptions, PartitionedProblem, C64};
use rayon::prelude::*;

/// Same output as the serial core scanner, with cells classified on the
/// rayon pool. Output order is row-major regardless of scheduling.
pub fn scan_domain_par(
    p: &PartitionedProblem,
    spec: &GridSpec,
    mode: ScanMode,
    opts: &IterationOptions,
) -> Result<DomainGrid, DptError> {
    spec.validate()?;
    let setup = prepare_scan(p, mode)?;
    let cells = (0..spec.cell_count())
        .into_par_iter()
        .map(|i| run_cell(p, &setup, mode, spec.lambda_at(i), opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DomainGrid { spec: *spec, cells })
}

/// Bifurcation CSV: one `(lambda, re, im)` row per recorded orbit value.
/// Escaping orbits contribute no rows.
pub fn write_bifurcation_csv<W: Write>(data: &[(f64, Vec<C64>)], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "re", "im"])?;
    for (lambda, values) in data {
        for v in values {
            w.serialize((lambda, v.re, v.im))?;
        }
    }
    w.flush()?;
    Ok(())
}
