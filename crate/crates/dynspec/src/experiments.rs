//! Order comparisons over random ensembles, and wall-clock benchmarks
//! expressed in units of one matrix-matrix product.

use std::io::Write;
use std::time::Instant;

use dynspec_core::baseline::{power_iteration, rayleigh_quotient_iteration};
use dynspec_core::dpt::{dominant_eigenpair, iterate_full, DptError};
use dynspec_core::partition::{build_benchmark, build_random_uniform, BenchFamily};
use dynspec_core::rspt::{compare_orders, CompareOptions, OrderComparison};
use dynspec_core::{c64, IterationOptions, Matrix, PartitionedProblem, SparseMatrix, Status, C64};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub sample_id: u64,
    pub lambda: f64,
    pub k_d: usize,
    pub k_rs: usize,
    pub d_converged: bool,
    pub rs_converged: bool,
}

impl CompareRow {
    fn new(sample_id: u64, lambda: f64, c: OrderComparison) -> Self {
        Self {
            sample_id,
            lambda,
            k_d: c.k_d,
            k_rs: c.k_rs,
            d_converged: c.d_converged,
            rs_converged: c.rs_converged,
        }
    }
}

/// Compares both methods on `diag(1..=n) + λR` for every `(λ, seed)` pair;
/// the sample id is the seed. Rows are ordered by λ, then seed.
pub fn ensemble_compare(
    n: usize,
    seeds: &[u64],
    lambdas: &[f64],
    opts: &CompareOptions,
) -> anyhow::Result<Vec<CompareRow>> {
    let problems = seeds
        .iter()
        .map(|&s| Ok((s, build_random_uniform(n, s)?)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let jobs: Vec<(f64, u64, &PartitionedProblem)> = lambdas
        .iter()
        .flat_map(|&l| problems.iter().map(move |(s, p)| (l, *s, p)))
        .collect();
    let rows = jobs
        .into_par_iter()
        .map(|(l, s, p)| compare_orders(p, c64(l), opts).map(|c| CompareRow::new(s, l, c)))
        .collect::<Result<Vec<_>, DptError>>()?;
    Ok(rows)
}

/// Compares both methods on one problem at each λ (sample id 0).
pub fn problem_compare(
    p: &PartitionedProblem,
    lambdas: &[f64],
    opts: &CompareOptions,
) -> Result<Vec<CompareRow>, DptError> {
    lambdas
        .par_iter()
        .map(|&l| compare_orders(p, c64(l), opts).map(|c| CompareRow::new(0, l, c)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaSummary {
    pub lambda: f64,
    pub samples: usize,
    pub d_success_rate: f64,
    pub rs_success_rate: f64,
    /// Samples where both methods converged.
    pub both: usize,
    /// Median of `k_rs - k_d` over those samples.
    pub median_k_diff: Option<f64>,
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    })
}

/// Per-λ success rates and median order difference, in order of first
/// appearance.
pub fn summarize(rows: &[CompareRow]) -> Vec<LambdaSummary> {
    let mut lambdas: Vec<f64> = Vec::new();
    for r in rows {
        if !lambdas.iter().any(|l| l.to_bits() == r.lambda.to_bits()) {
            lambdas.push(r.lambda);
        }
    }
    lambdas
        .into_iter()
        .map(|lambda| {
            let sel: Vec<&CompareRow> = rows.iter().filter(|r| r.lambda.to_bits() == lambda.to_bits()).collect();
            let count = |f: fn(&CompareRow) -> bool| sel.iter().filter(|r| f(r)).count();
            let diffs: Vec<f64> = sel
                .iter()
                .filter(|r| r.d_converged && r.rs_converged)
                .map(|r| r.k_rs as f64 - r.k_d as f64)
                .collect();
            LambdaSummary {
                lambda,
                samples: sel.len(),
                d_success_rate: count(|r| r.d_converged) as f64 / sel.len() as f64,
                rs_success_rate: count(|r| r.rs_converged) as f64 / sel.len() as f64,
                both: diffs.len(),
                median_k_diff: median(diffs),
            }
        })
        .collect()
}

pub fn write_csv<W: Write, T: Serialize>(rows: &[T], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub reps: usize,
    pub median_seconds: f64,
    pub ratio_to_mmt: f64,
    /// Whether the timed solver met its own stopping rule.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub family: BenchFamily,
    pub lambda: f64,
    pub seed: u64,
    pub reps: usize,
    /// Rayleigh-quotient iteration uses dense LU; it is skipped above this size.
    pub rqi_max_n: usize,
    pub power_max_iter: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            family: BenchFamily::ErLaplacian,
            lambda: 0.01,
            seed: 0,
            reps: 5,
            rqi_max_n: 400,
            power_max_iter: 10_000,
        }
    }
}

/// `M = D + λΔ` in the storage of `Δ`.
pub fn assemble_matrix(p: &PartitionedProblem) -> Matrix {
    match &p.delta {
        Matrix::Dense(_) => Matrix::Dense(p.assemble()),
        Matrix::Sparse(s) => {
            let mut t: Vec<(usize, usize, C64)> = s.triplets().map(|(i, j, v)| (i, j, v * p.lambda)).collect();
            t.extend(p.d.entries().iter().enumerate().map(|(i, &e)| (i, i, e)));
            Matrix::Sparse(SparseMatrix::from_triplets(p.n(), p.n(), t).expect("indices come from a valid matrix"))
        }
    }
}

fn time<T>(reps: usize, mut f: impl FnMut() -> T) -> (f64, T) {
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps.max(1) {
        let t0 = Instant::now();
        last = Some(std::hint::black_box(f()));
        times.push(t0.elapsed().as_secs_f64());
    }
    (median(times).unwrap_or(0.0), last.expect("at least one repetition"))
}

/// Times `M·M` and each solver at every size. Pure reporting: solver
/// failures are recorded in the `converged` column, not raised.
pub fn bench(sizes: &[usize], cfg: &BenchConfig) -> anyhow::Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        let p = build_benchmark(cfg.family, n, cfg.seed, c64(cfg.lambda))?;
        let m = assemble_matrix(&p);
        let (mmt, _) = time(cfg.reps, || m.matmul(&m).map(|x| x.nnz()));
        let mut push = |method: &str, secs: f64, converged: bool| {
            rows.push(BenchRow {
                method: method.into(),
                n,
                reps: cfg.reps,
                median_seconds: secs,
                ratio_to_mmt: if mmt > 0.0 { secs / mmt } else { f64::NAN },
                converged,
            })
        };
        push("mmt", mmt, true);
        let opts = IterationOptions::default();
        let (t, r) = time(cfg.reps, || iterate_full(&p, &opts));
        push("dpt-full", t, r.map(|r| r.converged()).unwrap_or(false));
        let (t, r) = time(cfg.reps, || dominant_eigenpair(&p, &opts));
        push("dpt-dominant", t, r.map(|r| r.status == Status::Converged).unwrap_or(false));
        let (t, r) = time(cfg.reps, || power_iteration(&p, 1e-10, cfg.power_max_iter));
        push("power", t, r.map(|r| r.converged).unwrap_or(false));
        if n <= cfg.rqi_max_n {
            // started from the top unperturbed state, as the dominant solver is
            let top = p
                .d
                .entries()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
                .map_or(0, |(i, _)| i);
            let mut start = vec![c64(0.0); n];
            start[top] = c64(1.0);
            let (t, r) = time(cfg.reps, || rayleigh_quotient_iteration(&p, &start, 1e-10, 100));
            push("rqi", t, r.map(|r| r.converged).unwrap_or(false));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lambda_needs_minimal_orders() {
        let rows = ensemble_compare(6, &[1, 2, 3], &[0.0], &CompareOptions::default()).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!(r.d_converged && r.rs_converged);
            assert_eq!(r.k_d, r.k_rs);
        }
        let s = summarize(&rows);
        assert_eq!(s[0].median_k_diff, Some(0.0));
        assert_eq!(s[0].d_success_rate, 1.0);
    }

    #[test]
    fn summary_groups_by_lambda() {
        let row = |lambda, k_d, k_rs, rs_converged| CompareRow {
            sample_id: 0,
            lambda,
            k_d,
            k_rs,
            d_converged: true,
            rs_converged,
        };
        let s = summarize(&[row(0.1, 5, 9, true), row(0.2, 6, 500, false), row(0.1, 5, 6, true)]);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].median_k_diff, Some(2.5));
        assert_eq!(s[1].rs_success_rate, 0.0);
        assert_eq!(s[1].median_k_diff, None);
    }

    #[test]
    fn sparse_assembly_matches_dense() {
        let p = build_benchmark(BenchFamily::ErLaplacian, 20, 3, c64(0.1)).unwrap();
        assert!(assemble_matrix(&p).to_dense().max_abs_diff(&p.assemble()) == 0.0);
    }

    #[test]
    fn bench_smoke() {
        let cfg = BenchConfig {
            reps: 1,
            ..BenchConfig::default()
        };
        let t0 = Instant::now();
        let rows = bench(&[16], &cfg).unwrap();
        assert!(t0.elapsed().as_secs_f64() < 1.0);
        let methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
        assert_eq!(methods, ["mmt", "dpt-full", "dpt-dominant", "power", "rqi"]);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("method,N,reps,median_seconds,ratio_to_mmt,converged\n"));
    }
}
