//! JSON and CSV forms of iteration reports, and the run manifest.
//!
//! Non-finite floats (an escaped orbit's step norm, say) serialize as JSON
//! `null`.

use std::io::Write;
use std::path::Path;

use dynspec_core::dpt::{DominantEigenpair, TraceRecord};
use dynspec_core::{ConvergenceReport, C64};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportJson {
    pub status: &'static str,
    pub iterations: usize,
    pub eigenvalues: Vec<[f64; 2]>,
    pub residuals: Vec<f64>,
    pub step_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape_iteration: Option<usize>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl From<&ConvergenceReport> for ReportJson {
    fn from(r: &ConvergenceReport) -> Self {
        Self {
            status: r.status.as_str(),
            iterations: r.iterations,
            eigenvalues: r.eigenvalues.iter().copied().map(pair).collect(),
            residuals: r.residuals.clone(),
            step_norm: r.step_norm,
            escape_iteration: r.escape_iteration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominantJson {
    pub status: &'static str,
    pub index: usize,
    pub eigenvalue: [f64; 2],
    pub residual: f64,
    pub iterations: usize,
    pub step_norm: f64,
    pub wall_seconds: f64,
}

impl DominantJson {
    pub fn new(d: &DominantEigenpair, wall_seconds: f64) -> Self {
        Self {
            status: d.status.as_str(),
            index: d.index,
            eigenvalue: pair(d.eigenvalue),
            residual: d.residual,
            iterations: d.iterations,
            step_norm: d.step_norm,
            wall_seconds,
        }
    }
}

#[derive(Debug, Serialize)]
struct TraceRow {
    k: usize,
    step_norm: f64,
    max_residual: f64,
    eigenvalue_change: f64,
}

/// Trace CSV with columns `k, step_norm, max_residual, eigenvalue_change`.
pub fn write_trace_csv<W: Write>(trace: &[TraceRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in trace {
        w.serialize(TraceRow {
            k: t.k,
            step_norm: t.step_norm,
            max_residual: t.max_residual,
            eigenvalue_change: t.eigenvalue_change,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Everything needed to rerun a command: the full argument vector, the
/// resolved configuration, the seed and the build that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub polynomial_table_version: u32,
    pub threads: usize,
    pub exit_code: i32,
    pub wall_seconds: f64,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
