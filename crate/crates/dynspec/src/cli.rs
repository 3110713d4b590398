//! The `dynspec` command line.
//!
//! Exit codes: 0 on success or convergence, 2 on legitimate
//! non-convergence, 1 on usage or input errors. Every run writes a manifest
//! JSON (default `dynspec-manifest.json` in the working directory).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use dynspec_core::analysis::{bifurcation_scan, GridSpec, ScanMode, SCAN_MAX_ITER};
use dynspec_core::dpt::{dominant_eigenpair, homotopy_solve, iterate_full, iterate_ramped, iterate_single, Mode};
use dynspec_core::partition::{build_oscillator, BenchFamily};
use dynspec_core::rspt::CompareOptions;
use dynspec_core::{fixtures, ConvergenceReport, DenseMatrix, IterationOptions, Matrix, PartitionedProblem, Status, C64};
use serde_json::json;

use crate::experiments::{self, BenchConfig};
use crate::mtx::write_matrix_market;
use crate::problem::{parse_complex, ProblemDescriptor, ProblemKind};
use crate::render::{parse_overlay, write_grid_csv, write_ppm};
use crate::report::{write_trace_csv, DominantJson, Manifest, ReportJson};
use crate::scan::{scan_domain_par, write_bifurcation_csv};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dynspec", version, about = "Eigenvalue problems by dynamical perturbation theory")]
pub struct Cli {
    /// Worker threads for scans and ensembles (0 = all cores).
    #[arg(long, global = true, env = "DYNSPEC_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Where to write the run manifest.
    #[arg(long, global = true, default_value = "dynspec-manifest.json")]
    pub manifest: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the full map (or one row) and report every eigenpair.
    Solve(SolveArgs),
    /// Iterate the single-vector map of the top unperturbed state.
    Dominant(DominantArgs),
    /// Orders needed by the map iteration and by the perturbation series.
    Compare(CompareArgs),
    /// Classify a rectangle of the complex λ-plane.
    Scan(ScanArgs),
    /// Orbit diagram of one coordinate along a real λ interval.
    Bifurcate(BifurcateArgs),
    /// Time solvers against one matrix-matrix product.
    ///
    /// Everything runs in f64; there is no arbitrary-precision timing column.
    Bench(BenchArgs),
    /// Write the oscillator problem as Matrix Market files.
    OscillatorExport(ExportArgs),
}

#[derive(Debug, Clone, Args)]
#[command(group(
    ArgGroup::new("source")
        .required(true)
        .args(["two_by_two", "three_by_three", "oscillator", "random", "er", "dense", "file_d"]),
))]
pub struct ProblemArgs {
    /// diag(0, 1) with the swap perturbation.
    #[arg(long)]
    pub two_by_two: bool,
    /// diag(0, 1, 3) with the symmetric 3×3 perturbation.
    #[arg(long)]
    pub three_by_three: bool,
    /// Oscillator with a δ-potential in N even basis functions.
    #[arg(long, value_name = "N")]
    pub oscillator: Option<usize>,
    /// diag(1..N) plus uniform [-1, 1] entries.
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,
    /// Oscillator diagonal plus a critical Erdős–Rényi Laplacian (sparse).
    #[arg(long, value_name = "N")]
    pub er: Option<usize>,
    /// Oscillator diagonal plus dense uniform entries on [-scale, scale].
    #[arg(long, value_name = "N")]
    pub dense: Option<usize>,
    /// Entry scale for --dense.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Matrix Market file holding D (a vector or a square matrix).
    #[arg(long, requires = "file_delta", value_name = "PATH")]
    pub file_d: Option<PathBuf>,
    /// Matrix Market file holding Δ.
    #[arg(long, requires = "file_d", value_name = "PATH")]
    pub file_delta: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Move the diagonal of Δ into D before iterating.
    #[arg(long)]
    pub epstein_nesbet: bool,
}

impl ProblemArgs {
    pub fn descriptor(&self, lambda: C64) -> ProblemDescriptor {
        let (kind, n) = if self.two_by_two {
            (ProblemKind::TwoByTwo, 2)
        } else if self.three_by_three {
            (ProblemKind::ThreeByThree, 3)
        } else if let Some(n) = self.oscillator {
            (ProblemKind::Oscillator, n)
        } else if let Some(n) = self.random {
            (ProblemKind::RandomUniform, n)
        } else if let Some(n) = self.er {
            (ProblemKind::ErLaplacian, n)
        } else if let Some(n) = self.dense {
            (ProblemKind::DenseUniform, n)
        } else {
            (ProblemKind::Files, 0)
        };
        let mut d = ProblemDescriptor::new(kind, n, self.seed, lambda);
        d.epstein_nesbet = self.epstein_nesbet;
        if kind == ProblemKind::DenseUniform {
            d.scale = Some(self.scale);
        }
        d.d_path = self.file_d.clone();
        d.delta_path = self.file_delta.clone();
        d
    }
}

fn complex_arg(s: &str) -> Result<C64, String> {
    parse_complex(s)
}

#[derive(Debug, Clone, Args)]
pub struct IterArgs {
    /// Step tolerance, relative to max(1, max |A|).
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Bound on every ‖Mz − εz‖∞/‖z‖∞.
    #[arg(long, default_value_t = 1e-10)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e8)]
    pub divergence_threshold: f64,
}

impl IterArgs {
    fn options(&self) -> IterationOptions {
        IterationOptions {
            tol: self.tol,
            residual_tol: self.residual_tol,
            max_iter: self.max_iter,
            divergence_threshold: self.divergence_threshold,
            ..IterationOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub iter: IterArgs,
    /// Perturbation parameter: `re`, `re,im` or `imi`.
    #[arg(long, default_value = "0", value_parser = complex_arg, allow_hyphen_values = true)]
    pub lambda: C64,
    /// Ramp λ_k = λ(1 − α^k) with this α.
    #[arg(long, value_name = "ALPHA", conflicts_with = "homotopy")]
    pub ramp: Option<f64>,
    /// Continue in this many equal λ stages, rediagonalizing between them.
    #[arg(long, value_name = "Q", conflicts_with = "row")]
    pub homotopy: Option<usize>,
    /// Iterate only this row (0-based).
    #[arg(long)]
    pub row: Option<usize>,
    /// Report JSON destination (default stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Eigenvectors (one per row, chart-normalized) as Matrix Market.
    #[arg(long)]
    pub eigenvectors: Option<PathBuf>,
    /// Per-iteration trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DominantArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub iter: IterArgs,
    #[arg(long, default_value = "0", value_parser = complex_arg, allow_hyphen_values = true)]
    pub lambda: C64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated real λ values.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub lambdas: Vec<f64>,
    /// With --random: number of seeds, starting at --seed.
    #[arg(long, default_value_t = 1)]
    pub samples: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub residual_tol: f64,
    /// Order (and iteration) budget for both methods.
    #[arg(long, default_value_t = 500)]
    pub max_order: usize,
    /// Per-sample CSV (default stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Per-λ summary CSV (default stderr).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Pixels per side.
    #[arg(long, default_value_t = 400)]
    pub grid: usize,
    /// Half-width of the square [−R, R]², ignored when --window is given.
    #[arg(long, default_value_t = 1.2)]
    pub range: f64,
    /// Explicit window: re_min re_max im_min im_max.
    #[arg(long, num_args = 4, allow_hyphen_values = true, value_names = ["RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"])]
    pub window: Option<Vec<f64>>,
    /// Iterate only this row.
    #[arg(long)]
    pub row: Option<usize>,
    /// Nonautonomous ramp α.
    #[arg(long)]
    pub ramp: Option<f64>,
    #[arg(long, default_value_t = SCAN_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value = "scan.ppm")]
    pub ppm: PathBuf,
    #[arg(long, default_value = "scan.csv")]
    pub csv: PathBuf,
    /// λ values to mark in red, one `re,im` per line.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BifurcateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"], default_values_t = [0.0, 1.2])]
    pub interval: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub row: usize,
    /// Recorded coordinate (default: the next index after the row).
    #[arg(long)]
    pub coord: Option<usize>,
    #[arg(long, default_value_t = 600)]
    pub samples: usize,
    #[arg(long, default_value_t = 1000)]
    pub transient: usize,
    #[arg(long, default_value_t = 64)]
    pub keep: usize,
    #[arg(long, short, default_value = "bifurcation.csv")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Er,
    Dense,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Er)]
    pub family: FamilyArg,
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 200, 400, 800])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entry scale for the dense family.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 400)]
    pub rqi_max_n: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Number of basis functions.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = ".")]
    pub dir: PathBuf,
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn exit_for(status: Status) -> i32 {
    if status == Status::Converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    }
}

/// Outcome of a subcommand: its exit code, the configuration recorded in
/// the manifest and the seed, if any.
struct Outcome {
    code: i32,
    config: serde_json::Value,
    seed: Option<u64>,
}

fn eigenvector_matrix(rep: &ConvergenceReport) -> Matrix {
    Matrix::Dense(DenseMatrix::clone(&rep.iterate.a))
}

fn cmd_solve(a: &SolveArgs) -> anyhow::Result<Outcome> {
    let desc = a.problem.descriptor(a.lambda);
    let p = desc.build()?;
    let mut opts = a.iter.options();
    opts.trace = a.trace.is_some();
    let rep = match (a.homotopy, a.ramp, a.row) {
        (Some(q), _, _) => homotopy_solve(&p, q, &opts)?,
        (None, Some(alpha), row) => {
            let mode = row.map_or(Mode::Full, Mode::Row);
            iterate_ramped(&p, alpha, mode, &opts)?
        }
        (None, None, Some(n)) => iterate_single(&p, n, &opts)?,
        (None, None, None) => iterate_full(&p, &opts)?,
    };
    let mut out = sink(a.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &ReportJson::from(&rep))?;
    writeln!(out)?;
    out.flush()?;
    if let Some(path) = &a.eigenvectors {
        write_matrix_market(&eigenvector_matrix(&rep), path)?;
    }
    if let Some(path) = &a.trace {
        write_trace_csv(&rep.trace, BufWriter::new(File::create(path)?))?;
    }
    Ok(Outcome {
        code: exit_for(rep.status),
        config: json!({
            "problem": desc,
            "options": options_json(&opts),
            "ramp": a.ramp,
            "homotopy": a.homotopy,
            "row": a.row,
        }),
        seed: Some(a.problem.seed),
    })
}

fn options_json(o: &IterationOptions) -> serde_json::Value {
    json!({
        "tol": o.tol,
        "residual_tol": o.residual_tol,
        "max_iter": o.max_iter,
        "divergence_threshold": o.divergence_threshold,
        "cycle_window": o.cycle_window,
    })
}

fn cmd_dominant(a: &DominantArgs) -> anyhow::Result<Outcome> {
    let desc = a.problem.descriptor(a.lambda);
    let p = desc.build()?;
    let opts = a.iter.options();
    let t0 = Instant::now();
    let d = dominant_eigenpair(&p, &opts)?;
    let wall = t0.elapsed().as_secs_f64();
    let mut out = sink(a.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &DominantJson::new(&d, wall))?;
    writeln!(out)?;
    out.flush()?;
    Ok(Outcome {
        code: exit_for(d.status),
        config: json!({ "problem": desc, "options": options_json(&opts) }),
        seed: Some(a.problem.seed),
    })
}

fn cmd_compare(a: &CompareArgs) -> anyhow::Result<Outcome> {
    let opts = CompareOptions {
        tol: a.tol,
        residual_tol: a.residual_tol,
        max_order: a.max_order,
        ..CompareOptions::default()
    };
    let desc = a.problem.descriptor(C64::new(0.0, 0.0));
    let rows = match a.problem.random {
        Some(n) => {
            if a.samples == 0 {
                bail!("--samples must be positive");
            }
            let seeds: Vec<u64> = (a.problem.seed..a.problem.seed + a.samples).collect();
            experiments::ensemble_compare(n, &seeds, &a.lambdas, &opts)?
        }
        None => experiments::problem_compare(&desc.build()?, &a.lambdas, &opts)?,
    };
    experiments::write_csv(&rows, sink(a.output.as_deref())?)?;
    let summary = experiments::summarize(&rows);
    match &a.summary {
        Some(p) => experiments::write_csv(&summary, File::create(p)?)?,
        None => experiments::write_csv(&summary, io::stderr().lock())?,
    }
    Ok(Outcome {
        code: EXIT_OK,
        config: json!({
            "problem": desc,
            "lambdas": a.lambdas,
            "samples": a.samples,
            "tol": opts.tol,
            "residual_tol": opts.residual_tol,
            "max_order": opts.max_order,
            "divergence_threshold": opts.divergence_threshold,
            "growth_factor": opts.growth_factor,
            "growth_run": opts.growth_run,
        }),
        seed: Some(a.problem.seed),
    })
}

fn cmd_scan(a: &ScanArgs) -> anyhow::Result<Outcome> {
    let desc = a.problem.descriptor(C64::new(0.0, 0.0));
    let p = desc.build()?;
    let spec = match &a.window {
        Some(w) => GridSpec {
            re_min: w[0],
            re_max: w[1],
            im_min: w[2],
            im_max: w[3],
            res_re: a.grid,
            res_im: a.grid,
        },
        None => GridSpec::square(a.range, a.grid),
    };
    let mode = match (a.ramp, a.row) {
        (Some(alpha), row) => ScanMode::Ramped { alpha, row },
        (None, Some(n)) => ScanMode::Row(n),
        (None, None) => ScanMode::Full,
    };
    let opts = IterationOptions {
        max_iter: a.max_iter,
        ..IterationOptions::default()
    };
    let overlay = match &a.overlay {
        Some(path) => parse_overlay(&std::fs::read_to_string(path)?).map_err(anyhow::Error::msg)?,
        None => Vec::new(),
    };
    let grid = scan_domain_par(&p, &spec, mode, &opts)?;
    write_ppm(&grid, &overlay, BufWriter::new(File::create(&a.ppm)?))?;
    write_grid_csv(&grid, BufWriter::new(File::create(&a.csv)?))?;
    Ok(Outcome {
        code: EXIT_OK,
        config: json!({
            "problem": desc,
            "grid": [spec.re_min, spec.re_max, spec.im_min, spec.im_max, spec.res_re, spec.res_im],
            "mode": format!("{mode:?}"),
            "options": options_json(&opts),
            "overlay_points": overlay.len(),
        }),
        seed: Some(a.problem.seed),
    })
}

fn cmd_bifurcate(a: &BifurcateArgs) -> anyhow::Result<Outcome> {
    let desc = a.problem.descriptor(C64::new(0.0, 0.0));
    let p = desc.build()?;
    let coord = a.coord.unwrap_or((a.row + 1) % p.n().max(1));
    let data = bifurcation_scan(&p, a.row, coord, a.interval[0], a.interval[1], a.samples, a.transient, a.keep)?;
    write_bifurcation_csv(&data, BufWriter::new(File::create(&a.output)?))?;
    Ok(Outcome {
        code: EXIT_OK,
        config: json!({
            "problem": desc,
            "interval": a.interval,
            "row": a.row,
            "coord": coord,
            "samples": a.samples,
            "transient": a.transient,
            "keep": a.keep,
        }),
        seed: Some(a.problem.seed),
    })
}

fn cmd_bench(a: &BenchArgs) -> anyhow::Result<Outcome> {
    let family = match a.family {
        FamilyArg::Er => BenchFamily::ErLaplacian,
        FamilyArg::Dense => BenchFamily::DenseUniform { scale: a.scale },
    };
    let cfg = BenchConfig {
        family,
        lambda: a.lambda,
        seed: a.seed,
        reps: a.reps,
        rqi_max_n: a.rqi_max_n,
        ..BenchConfig::default()
    };
    let rows = experiments::bench(&a.sizes, &cfg)?;
    experiments::write_csv(&rows, sink(a.output.as_deref())?)?;
    Ok(Outcome {
        code: EXIT_OK,
        config: json!({
            "family": format!("{family:?}"),
            "sizes": a.sizes,
            "reps": a.reps,
            "lambda": a.lambda,
            "rqi_max_n": a.rqi_max_n,
            "power_max_iter": cfg.power_max_iter,
        }),
        seed: Some(a.seed),
    })
}

fn cmd_export(a: &ExportArgs) -> anyhow::Result<Outcome> {
    let p: PartitionedProblem = build_oscillator(a.n)?;
    std::fs::create_dir_all(&a.dir)?;
    let d = Matrix::Dense(DenseMatrix::from_vec(a.n, 1, p.d.entries().to_vec())?);
    write_matrix_market(&d, a.dir.join("d.mtx"))?;
    write_matrix_market(&p.delta, a.dir.join("delta.mtx"))?;
    let desc = ProblemDescriptor::new(ProblemKind::Oscillator, a.n, 0, p.lambda);
    std::fs::write(a.dir.join("problem.json"), serde_json::to_string_pretty(&desc)?)?;
    Ok(Outcome {
        code: EXIT_OK,
        config: json!({ "n": a.n, "dir": a.dir }),
        seed: None,
    })
}

fn dispatch(cmd: &Command) -> anyhow::Result<Outcome> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Dominant(a) => cmd_dominant(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Bifurcate(a) => cmd_bifurcate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::OscillatorExport(a) => cmd_export(a),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Solve(_) => "solve",
        Command::Dominant(_) => "dominant",
        Command::Compare(_) => "compare",
        Command::Scan(_) => "scan",
        Command::Bifurcate(_) => "bifurcate",
        Command::Bench(_) => "bench",
        Command::OscillatorExport(_) => "oscillator-export",
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    if cli.threads > 0 {
        // fails only if a pool already exists, in which case it is reused
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let t0 = Instant::now();
    let result = dispatch(&cli.command);
    let (code, config, seed) = match result {
        Ok(o) => (o.code, o.config, o.seed),
        Err(e) => {
            eprintln!("error: {e:#}");
            (EXIT_INPUT, serde_json::Value::Null, None)
        }
    };
    let manifest = Manifest {
        command: command_name(&cli.command).into(),
        args,
        config,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        polynomial_table_version: fixtures::POLYNOMIAL_TABLE_VERSION,
        threads: rayon::current_num_threads(),
        exit_code: code,
        wall_seconds: t0.elapsed().as_secs_f64(),
    };
    if let Err(e) = manifest.write(&cli.manifest) {
        eprintln!("error: writing manifest {}: {e:#}", cli.manifest.display());
        return EXIT_INPUT;
    }
    code
}
