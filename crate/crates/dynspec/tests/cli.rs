use std::path::Path;
use std::process::{Command, Output};

use dynspec::mtx::read_matrix_market;
use dynspec::render::read_grid_csv;
use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynspec"))
        .args(args)
        .current_dir(dir)
        .env_remove("DYNSPEC_THREADS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("dynspec-manifest.json")).unwrap()).unwrap()
}

fn eigenvalues(v: &Value) -> Vec<(f64, f64)> {
    v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap()))
        .collect()
}

#[test]
fn solve_two_by_two() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["solve", "--two-by-two", "--lambda", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "converged");
    let e = eigenvalues(&v);
    assert!((e[0].0 + 0.009_901_951_359_278_5).abs() < 1e-10);
    assert!((e[1].0 - 1.009_901_951_359_278_5).abs() < 1e-10);
    let m = manifest(dir.path());
    assert_eq!(m["command"], "solve");
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["config"]["problem"]["kind"], "two-by-two");
    assert!(m["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn solve_from_files_at_zero_lambda() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("d.mtx"), "%%MatrixMarket matrix array real general\n3 1\n0.5\n2\n-1\n").unwrap();
    std::fs::write(
        dir.path().join("delta.mtx"),
        "%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n2 1 1.0\n3 2 0.5\n",
    )
    .unwrap();
    let out = run(dir.path(), &["solve", "--file-d", "d.mtx", "--file-delta", "delta.mtx", "--lambda", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(eigenvalues(&json(&out)), vec![(0.5, 0.0), (2.0, 0.0), (-1.0, 0.0)]);
}

#[test]
fn exported_oscillator_solves_like_the_builder() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["oscillator-export", "--n", "12", "--dir", "osc"]);
    assert_eq!(out.status.code(), Some(0));
    let delta = read_matrix_market(dir.path().join("osc/delta.mtx")).unwrap();
    assert_eq!(delta.shape(), (12, 12));
    let a = run(dir.path(), &["solve", "--oscillator", "12", "--lambda", "0.7"]);
    let b = run(
        dir.path(),
        &["solve", "--file-d", "osc/d.mtx", "--file-delta", "osc/delta.mtx", "--lambda", "0.7"],
    );
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(json(&a), json(&b));
}

#[test]
fn oscillator_beyond_the_series_radius_converges() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["solve", "--oscillator", "100", "--lambda", "2.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["status"], "converged");
}

#[test]
fn non_convergence_exits_two_and_homotopy_recovers() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["solve", "--two-by-two", "--lambda", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_ne!(json(&out)["status"], "converged");
    assert_eq!(manifest(dir.path())["exit_code"], 2);
    let out = run(dir.path(), &["solve", "--two-by-two", "--lambda", "1.2", "--homotopy", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let e = eigenvalues(&json(&out));
    let s = (1.0f64 + 4.0 * 1.44).sqrt();
    assert!((e[0].0 - (1.0 - s) / 2.0).abs() < 1e-8);
}

#[test]
fn complex_lambda_and_ramp() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["solve", "--three-by-three", "--lambda", "0.1,0.05", "--ramp", "0.5", "--row", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(eigenvalues(&json(&out)).len(), 1);
}

#[test]
fn trace_and_eigenvectors_are_written() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["solve", "--two-by-two", "--lambda", "0.3", "--trace", "t.csv", "--eigenvectors", "v.mtx", "-o", "r.json"],
    );
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let trace = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(trace.starts_with("k,step_norm,max_residual,eigenvalue_change"));
    assert_eq!(trace.lines().count() as u64, report["iterations"].as_u64().unwrap() + 1);
    let v = read_matrix_market(dir.path().join("v.mtx")).unwrap().to_dense();
    assert_eq!(v.shape(), (2, 2));
    assert_eq!(v[(0, 0)].re, 1.0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["solve", "--lambda", "0.1"],
        vec!["solve", "--two-by-two", "--oscillator", "5"],
        vec!["solve", "--file-d", "d.mtx"],
        vec!["solve", "--two-by-two", "--lambda", "abc"],
        vec!["solve", "--file-d", "missing.mtx", "--file-delta", "missing.mtx"],
        vec!["frobnicate"],
    ] {
        let out = run(dir.path(), &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn dominant_runs() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["dominant", "--er", "10000", "--lambda", "0.01", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    assert!(v["iterations"].as_u64().unwrap() <= 20);
    assert!(v["wall_seconds"].as_f64().is_some());

    std::fs::write(dir.path().join("d.mtx"), "%%MatrixMarket matrix array real general\n3 1\n3\n7\n-1\n").unwrap();
    std::fs::write(dir.path().join("z.mtx"), "%%MatrixMarket matrix coordinate real general\n3 3 0\n").unwrap();
    let out = run(dir.path(), &["dominant", "--file-d", "d.mtx", "--file-delta", "z.mtx", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["iterations"], 1);

    std::fs::write(dir.path().join("tie.mtx"), "%%MatrixMarket matrix array real general\n3 1\n2\n5\n5\n").unwrap();
    let out = run(dir.path(), &["dominant", "--file-d", "tie.mtx", "--file-delta", "z.mtx"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn compare_ensemble_and_oscillator() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["compare", "--random", "50", "--samples", "20", "--lambdas", "0,0.05", "--summary", "s.csv"],
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 40);
    let summary = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(summary.starts_with("lambda,samples,d_success_rate,rs_success_rate,both,median_k_diff"));
    let s = csv_rows(&summary);
    assert_eq!(s[0][5], "0.0");
    assert_eq!((s[1][2].as_str(), s[1][3].as_str()), ("1.0", "1.0"));
    assert!(s[1][5].parse::<f64>().unwrap() >= 0.0);

    let out = run(dir.path(), &["compare", "--oscillator", "100", "--lambdas", "0.5,1.5", "--tol", "1e-10"]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let k = |r: &Vec<String>, i: usize| r[i].parse::<usize>().unwrap();
    assert!(k(&rows[1], 2) > k(&rows[0], 2));
    assert!(k(&rows[1], 3) > k(&rows[0], 3));
    assert!(k(&rows[1], 3) > k(&rows[1], 2));
}

#[test]
fn scan_writes_image_and_grid() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["scan", "--two-by-two", "--grid", "200", "--threads", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ppm = std::fs::read(dir.path().join("scan.ppm")).unwrap();
    let header = b"P6\n200 200\n255\n";
    assert_eq!(&ppm[..header.len()], header);
    assert_eq!(ppm.len(), header.len() + 3 * 40_000);
    let cells = read_grid_csv(std::fs::File::open(dir.path().join("scan.csv")).unwrap()).unwrap();
    assert_eq!(cells.len(), 40_000);
    assert_eq!(manifest(dir.path())["threads"], 2);
}

#[test]
fn threads_come_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dynspec"))
        .args(["scan", "--two-by-two", "--grid", "8"])
        .current_dir(dir.path())
        .env("DYNSPEC_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(manifest(dir.path())["threads"], 3);
}

#[test]
fn ramped_scan_differs_from_the_autonomous_one() {
    let dir = TempDir::new().unwrap();
    let base = ["scan", "--three-by-three", "--row", "1", "--grid", "40", "--range", "1.5"];
    let plain = run(dir.path(), &[&base[..], &["--csv", "a.csv", "--ppm", "a.ppm"]].concat());
    let ramped = run(dir.path(), &[&base[..], &["--ramp", "0.9", "--csv", "b.csv", "--ppm", "b.ppm"]].concat());
    assert_eq!(plain.status.code(), Some(0));
    assert_eq!(ramped.status.code(), Some(0));
    let read = |f: &str| read_grid_csv(std::fs::File::open(dir.path().join(f)).unwrap()).unwrap();
    let (a, b) = (read("a.csv"), read("b.csv"));
    assert!(a.iter().zip(&b).any(|(x, y)| x.1 != y.1));
}

#[test]
fn bifurcation_shows_period_doubling() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["bifurcate", "--two-by-two", "--interval", "0", "1.2", "--samples", "13", "--keep", "16"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("bifurcation.csv")).unwrap();
    let distinct = |lambda: f64| {
        let mut v: Vec<i64> = csv_rows(&text)
            .iter()
            .filter(|r| (r[0].parse::<f64>().unwrap() - lambda).abs() < 1e-12)
            .map(|r| (r[1].parse::<f64>().unwrap() * 1e6).round() as i64)
            .collect();
        v.sort();
        v.dedup();
        v.len()
    };
    // x ↦ λ(x² - 1): fixed point below √3/2, a 2-cycle at λ = 1
    assert_eq!(distinct(0.5), 1);
    assert_eq!(distinct(1.0), 2);
}

#[test]
fn bench_smoke_run() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["bench", "--sizes", "16", "--reps", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("method,N,reps,median_seconds,ratio_to_mmt,converged"));
    assert_eq!(text.lines().count(), 6);
}
