//! Acceptance criteria, one test per criterion. Each prints a single
//! `[PASS]`/`[FAIL]` line with the measured quantities before asserting, so
//! `cargo test --test acceptance -- --nocapture` doubles as a report.

use std::f64::consts::TAU;

use dynspec::experiments::{ensemble_compare, summarize};
use dynspec::scan::scan_domain_par;
use dynspec_core::analysis::{
    fixed_points, guaranteed_radius, scan_options, validate_multiplier_curve, CellClass, Fixture, GridSpec,
    ScanMode, RADIUS_CONSTANT,
};
use dynspec_core::baseline::shift_invert_power;
use dynspec_core::dpt::{
    dominant_eigenpair, iterate_fixed_steps, iterate_full, jacobian_single, multipliers, IterationOptions, Status,
};
use dynspec_core::fixtures::{two_by_two, two_by_two_eigenvalues};
use dynspec_core::matrix::{hadamard_dense, triangle_dense};
use dynspec_core::partition::{
    build_benchmark, build_oscillator, build_random_uniform, build_theta, gap_row, BenchFamily, PartitionedProblem,
    DEGENERACY_TOL,
};
use dynspec_core::poly::{eigenvalues, multiset_distance, ROOT_TOL};
use dynspec_core::rspt::{compare_orders, rs_coefficients, rs_converge, rs_partial_sum, truncation_agreement, CompareOptions};
use dynspec_core::{c64, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] acceptance {id} ({name}): {detail}");
}

fn theta_norm_delta_norm(p: &PartitionedProblem) -> f64 {
    RADIUS_CONSTANT / guaranteed_radius(&build_theta(&p.d).unwrap(), &p.delta).unwrap()
}

#[test]
fn criterion_1_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_residual = 0.0f64;
    let mut worst_distance = 0.0f64;
    let mut not_converged = 0;
    for seed in 0..200u64 {
        let n = 2 + (seed as usize % 5);
        let base = build_random_uniform(n, 10_000 + seed).unwrap();
        let radius = RADIUS_CONSTANT / theta_norm_delta_norm(&base);
        let lambda = C64::from_polar(radius * rng.random_range(0.05..0.999), rng.random_range(0.0..TAU));
        let p = base.with_lambda(lambda);
        let rep = iterate_full(&p, &IterationOptions::default()).unwrap();
        if rep.status != Status::Converged {
            not_converged += 1;
            continue;
        }
        let oracle = eigenvalues(&p.assemble(), ROOT_TOL).unwrap();
        worst_residual = worst_residual.max(rep.max_residual());
        worst_distance = worst_distance.max(multiset_distance(&rep.eigenvalues, &oracle));
    }
    let pass = not_converged == 0 && worst_residual < 1e-10 && worst_distance < 1e-8;
    report(
        1,
        "oracle equivalence",
        pass,
        format!("200 problems, {not_converged} unconverged, max residual {worst_residual:.2e} (< 1e-10), max eigenvalue distance {worst_distance:.2e} (< 1e-8)"),
    );
    assert!(pass);
}

#[test]
fn criterion_2_two_by_two_closed_form() {
    let mut worst = 0.0f64;
    let mut rs_ok = true;
    let mut detail = Vec::new();
    for l in [0.1, 0.3, 0.45, 0.6, 0.8] {
        let p = two_by_two(c64(l));
        let rep = iterate_full(&p, &IterationOptions::default()).unwrap();
        let (minus, plus) = two_by_two_eigenvalues(c64(l));
        let err = if rep.status == Status::Converged {
            (rep.eigenvalues[0] - minus).norm().max((rep.eigenvalues[1] - plus).norm())
        } else {
            f64::INFINITY
        };
        worst = worst.max(err);
        let rs = rs_converge(&p, c64(l), &CompareOptions::default()).unwrap();
        let expect_rs = l < 0.5;
        rs_ok &= rs.converged == expect_rs && rs.diverged != expect_rs;
        detail.push(format!("λ={l}: rs {}", if rs.converged { "converges" } else { "diverges" }));
    }
    let pass = worst < 1e-10 && rs_ok;
    report(
        2,
        "2x2 closed form",
        pass,
        format!("max eigenvalue error {worst:.2e} (< 1e-10); {}", detail.join(", ")),
    );
    assert!(pass);
}

/// Multipliers of every fixed point of row 0 of the 2×2 fixture.
fn two_by_two_multipliers(lambda: C64) -> Vec<C64> {
    let p = two_by_two(lambda);
    let theta = gap_row(&p.d, 0, DEGENERACY_TOL).unwrap();
    fixed_points(&p, 0, 0)
        .unwrap()
        .iter()
        .map(|z| multipliers(&jacobian_single(z, 0, &theta, &p.delta, lambda), &[1]).unwrap()[0])
        .collect()
}

#[test]
fn criterion_3_bifurcation_structure() {
    let flip = two_by_two_multipliers(c64(3f64.sqrt() / 2.0));
    let stable = flip.iter().copied().min_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    let flip_err = (stable + 1.0).norm();
    let fold = two_by_two_multipliers(C64::new(0.0, 0.5));
    let fold_err = fold.iter().fold(0.0f64, |m, mu| m.max((mu - 1.0).norm()));

    let spec = GridSpec::square(1.2, 400);
    let grid = scan_domain_par(&two_by_two(c64(0.0)), &spec, ScanMode::Full, &scan_options()).unwrap();
    let px = spec.pixel_re();
    let converged = |row: usize, col: usize| grid.cell(row, col).class == CellClass::Converged;
    let (center_row, center_col) = (200, 200);
    assert_eq!(spec.lambda_at(center_row * 400 + center_col), c64(0.0));
    // boundary = midpoint between the last converged and the first other cell
    let right = (center_col..400).find(|&c| !converged(center_row, c)).unwrap();
    let left = (0..=center_col).rev().find(|&c| !converged(center_row, c)).unwrap();
    let up = (0..=center_row).rev().find(|&r| !converged(r, center_col)).unwrap();
    let down = (center_row..400).find(|&r| !converged(r, center_col)).unwrap();
    let x_right = spec.re_at(right) - px / 2.0;
    let x_left = spec.re_at(left) + px / 2.0;
    let y_up = spec.im_at(up) - px / 2.0;
    let y_down = spec.im_at(down) + px / 2.0;
    let target = 3f64.sqrt() / 2.0;
    let off = [
        (x_right - target).abs() / px,
        (x_left + target).abs() / px,
        (y_up - 0.5).abs() / px,
        (y_down + 0.5).abs() / px,
    ];
    let worst_px = off.iter().fold(0.0f64, |m, &o| m.max(o));
    let pass = flip_err < 1e-8 && fold_err < 1e-6 && worst_px <= 2.0;
    report(
        3,
        "bifurcation structure",
        pass,
        format!(
            "flip |μ+1| = {flip_err:.2e} (< 1e-8), fold |μ-1| = {fold_err:.2e} (< 1e-6), boundary at re {x_left:.4}/{x_right:.4}, im {y_down:.4}/{y_up:.4}, worst offset {worst_px:.2} px (<= 2)"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_truncation_theorem() {
    // k = 1: both truncations equal I + λθ⋆Δ' exactly, so the ratio is 0/0;
    // the line checks exact agreement instead and the ratio for k = 2..4.
    let mut k1 = 0.0f64;
    let mut worst_ratio_err = 0.0f64;
    let mut worst_formula = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for seed in 0..10u64 {
        let p = build_random_uniform(5, 400 + seed).unwrap().to_epstein_nesbet();
        let scale = theta_norm_delta_norm(&p);
        let lambda = C64::from_polar(0.01 / scale, rng.random_range(0.0..TAU));
        k1 = k1.max(truncation_agreement(&p, 1, lambda).unwrap());
        for k in 2..=4usize {
            let full = truncation_agreement(&p, k, lambda).unwrap();
            let half = truncation_agreement(&p, k, lambda / 2.0).unwrap();
            let expected = 2f64.powi(k as i32 + 1);
            worst_ratio_err = worst_ratio_err.max(((full / half) - expected).abs() / expected);
        }
        // A_D^(2) - A_RS^(2) = -λ³ θ⋆[((θ⋆Δ')Δ') ▷ (θ⋆Δ')]
        let lambda = c64(0.1 / scale);
        let q = p.with_lambda(lambda);
        let theta = build_theta(&q.d).unwrap();
        let t = theta.matrix();
        let dt = q.delta.to_dense().transpose();
        let a1 = hadamard_dense(t, &dt).unwrap();
        let inner = triangle_dense(&a1.matmul(&dt).unwrap(), &a1).unwrap();
        let formula = hadamard_dense(t, &inner).unwrap().scale(-lambda * lambda * lambda);
        let d2 = iterate_fixed_steps(&q, &theta, 2).unwrap();
        let (rs2, _) = rs_partial_sum(&rs_coefficients(&p, 2).unwrap(), lambda);
        worst_formula = worst_formula.max(d2.sub(&rs2).unwrap().max_abs_diff(&formula));
    }
    let pass = k1 < 1e-15 && worst_ratio_err < 0.2 && worst_formula < 1e-12;
    report(
        4,
        "RS truncation theorem",
        pass,
        format!("k=1 difference {k1:.1e} (exact), k=2..4 worst ratio error {:.1}% (< 20%), λ³ formula error {worst_formula:.1e} (< 1e-12)", 100.0 * worst_ratio_err),
    );
    assert!(pass);
}

#[test]
fn criterion_5_delta_potential() {
    let p = build_oscillator(100).unwrap();
    let opts = CompareOptions {
        tol: 1e-10,
        ..CompareOptions::default()
    };
    let a = compare_orders(&p, c64(1.5), &opts).unwrap();
    let b = compare_orders(&p, c64(2.5), &opts).unwrap();
    let rs = rs_converge(&p, c64(2.5), &opts).unwrap();
    let pass = a.d_converged && a.rs_converged && a.k_rs > a.k_d && b.d_converged && !b.rs_converged && rs.diverged;
    report(
        5,
        "delta potential",
        pass,
        format!(
            "λ=1.5: K_D={} K_RS={}; λ=2.5: D converged={} in {} steps, RS diverged={} at order {}",
            a.k_d, a.k_rs, b.d_converged, b.k_d, rs.diverged, rs.order
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_ensemble() {
    let lambdas = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4];
    let seeds: Vec<u64> = (0..20).collect();
    let rows = ensemble_compare(50, &seeds, &lambdas, &CompareOptions::default()).unwrap();
    let summary = summarize(&rows);
    let mut pass = true;
    let mut detail = Vec::new();
    for s in &summary {
        pass &= s.d_success_rate >= s.rs_success_rate;
        pass &= s.median_k_diff.is_none_or(|m| m >= 0.0);
        detail.push(format!(
            "λ={}: D {:.2} RS {:.2} median {}",
            s.lambda,
            s.d_success_rate,
            s.rs_success_rate,
            s.median_k_diff.map_or("n/a".into(), |m| m.to_string())
        ));
    }
    report(6, "ensemble comparison", pass, format!("N=50, 20 seeds; {}", detail.join("; ")));
    assert!(pass);
}

#[test]
fn criterion_7_boundary_polynomials() {
    let samples: Vec<C64> = (0..20)
        .map(|j| C64::from_polar(0.05 + 1.3 * j as f64 / 20.0, 2.399_963_229_728_653 * j as f64))
        .collect();
    let mut lines = Vec::new();
    let mut pass = true;
    for (fixture, row, name) in [
        (Fixture::TwoByTwo, 0, "2x2"),
        (Fixture::ThreeByThree, 0, "3x3 n=1"),
        (Fixture::ThreeByThree, 1, "3x3 n=2"),
        (Fixture::ThreeByThree, 2, "3x3 n=3"),
    ] {
        let v = validate_multiplier_curve(fixture, row, &samples).unwrap();
        let skipped = v.samples.iter().filter(|s| s.skipped).count();
        pass &= skipped == 0 && v.max_residual < 1e-6;
        lines.push(format!("{name} {:.1e} (all pairs {:.1e})", v.max_residual, v.max_pair_residual));
    }
    report(7, "boundary polynomials", pass, format!("20 samples each, residual < 1e-6: {}", lines.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_8_guaranteed_radius() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut failures = 0;
    let mut max_iters = 0;
    for seed in 0..100u64 {
        let base = build_random_uniform(10, 8_000 + seed).unwrap();
        let lambda = C64::from_polar(0.1699 / theta_norm_delta_norm(&base), rng.random_range(0.0..TAU));
        let rep = iterate_full(&base.with_lambda(lambda), &IterationOptions::default()).unwrap();
        if rep.status != Status::Converged {
            failures += 1;
        }
        max_iters = max_iters.max(rep.iterations);
    }
    let pass = failures == 0;
    report(
        8,
        "guaranteed radius",
        pass,
        format!("100 problems at |λ|‖θ‖‖Δ‖ = 0.1699, {failures} failures, slowest {max_iters} iterations"),
    );
    assert!(pass);
}

#[test]
fn criterion_9_dominant_at_scale() {
    let n = 100_000;
    // an isolated top vertex makes e_top exact; take the first seed where it
    // has at least two neighbours
    let (p, degree) = (9u64..)
        .map(|seed| {
            let p = build_benchmark(BenchFamily::ErLaplacian, n, seed, c64(0.01)).unwrap();
            let degree = (0..n).filter(|&j| j != n - 1 && p.delta.get(n - 1, j) != c64(0.0)).count();
            (p, degree)
        })
        .find(|&(_, degree)| degree >= 2)
        .unwrap();
    let t0 = std::time::Instant::now();
    let d = dominant_eigenpair(&p, &IterationOptions::default()).unwrap();
    let dpt_secs = t0.elapsed().as_secs_f64();
    let top = p.d.entries()[d.index].re;
    let oracle = shift_invert_power(&p, top + 0.5, 1e-10, 200).unwrap();
    let gap = (d.eigenvalue - oracle.eigenvalue).norm();
    let pass = d.status == Status::Converged && d.residual < 1e-10 && d.iterations <= 20 && oracle.converged && gap < 1e-8;
    report(
        9,
        "dominant eigenpair at scale",
        pass,
        format!(
            "N=1e5, top degree {degree}, residual {:.1e} (< 1e-10) in {} iterations (<= 20, {dpt_secs:.2} s), oracle gap {gap:.1e} (< 1e-8) after {} shift-invert steps",
            d.residual, d.iterations, oracle.iterations
        ),
    );
    assert!(pass);
}
