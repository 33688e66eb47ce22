//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria 4 and 6 are split so that the branches that are attainable at
//! desk scale stay green while the documented out-of-reach branches fail
//! honestly with their measured values in the panic message (see the README
//! section on known red criteria for the analysis).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use kernelab::designs::{grid_design, halton_points, Design};
use kernelab::harness::{
    emit_report, power_function_sweep, run_gp_convergence, run_krr_convergence, run_table2,
    ExperimentConfig, ReportFormat, TABLE2_REFERENCE_SLOPES, TABLE2_ROWS,
};
use kernelab::kernels::{matern_inverse_transform_1d, Kernel, MaternKernel};
use kernelab::rates::{estimate_eigendecay, triangle_target};
use kernelab::regress::{fit_krr, fit_regularized, Observations};
use kernelab::specfun::bessel_k;

const SEED: u64 = 42;

fn report_line(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {}: {} ({detail})",
        criterion,
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Criterion 1: the four-row convergence study reproduces the reference
/// slopes within +-0.08, the theoretical slopes within +-0.10, R^2 >= 0.95.
#[test]
fn c1_table2_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_table2(SEED, dir.path()).unwrap();
    let mut all_ok = true;
    for (i, row) in summary.rows.iter().enumerate() {
        let (m0, m) = TABLE2_ROWS[i];
        let ref_slope = TABLE2_REFERENCE_SLOPES[i];
        let dev_ref = (row.estimated_slope - ref_slope).abs();
        let dev_theory = (row.estimated_slope - row.theoretical_slope).abs();
        let ok = dev_ref <= 0.08 && dev_theory <= 0.10 && row.r2 >= 0.95;
        all_ok &= ok;
        report_line(
            &format!("1 [table2 m0={m0} m={m}]"),
            ok,
            &format!(
                "slope {:.4}, reference {:.4} (dev {:.4}), theory {:.4} (dev {:.4}), R^2 {:.4}",
                row.estimated_slope, ref_slope, dev_ref, row.theoretical_slope, dev_theory, row.r2
            ),
        );
    }
    assert!(all_ok, "at least one table row out of band");
}

/// Criterion 2: GP and KRR dual routes agree to 1e-8 (relative to the
/// predictor scale over the test set) on 50 random instances.
#[test]
fn c2_gp_krr_identity() {
    let mut rng = ChaCha12Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = 20 + (rng.gen::<u64>() % 81) as usize; // n in [20, 100]
        let nu = 0.6 + 2.4 * rng.gen::<f64>();
        let kernel = Kernel::matern(nu, 1.0).unwrap();
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>()]).collect();
        let design = match Design::new(pts) {
            Ok(d) => d,
            Err(_) => continue, // astronomically unlikely duplicate draw
        };
        let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let lambda = 10f64.powf(-3.0 * rng.gen::<f64>());
        let obs = Observations::new(design, y, 0.25).unwrap();

        let gp = fit_regularized(&obs, &kernel, lambda * n as f64).unwrap();
        let krr = fit_krr(&obs, &kernel, lambda).unwrap();
        let test: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64 + 0.5) / 50.0]).collect();
        let a = gp.predict_many(&test).unwrap();
        let b = krr.predict_many(&test).unwrap();
        let scale = a.iter().chain(&b).map(|v| v.abs()).fold(1e-12, f64::max);
        for (ai, bi) in a.iter().zip(&b) {
            worst = worst.max((ai - bi).abs() / scale);
        }
    }
    let pass = worst <= 1e-8;
    report_line("2 [gp-krr identity]", pass, &format!("max discrepancy {worst:.3e}"));
    assert!(pass);
}

/// Criterion 3: closed-form MSPE of the true-kernel predictor with nugget C
/// is bounded by max(mu/C, C/mu, 1) times the conditional variance.
#[test]
fn c3_proposition1_inequality() {
    let kernel = Kernel::matern(1.5, 1.0).unwrap();
    let mu = 0.25; // sigma_eps^2 / sigma^2 = 0.25 / 1.0
    let test = halton_points(100, 1).unwrap();
    let mut worst_margin = f64::NEG_INFINITY;
    for &n in &[10usize, 50, 100] {
        let grid = grid_design(n, 1).unwrap();
        let mut r_mat = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                r_mat[(i, j)] = kernel
                    .eval_dist((grid.point(i)[0] - grid.point(j)[0]).abs())
                    .unwrap();
            }
        }
        let r_mu = {
            let mut m = r_mat.clone();
            for i in 0..n {
                m[(i, i)] += mu;
            }
            m
        };
        let chol_mu = nalgebra::Cholesky::new(r_mu.clone()).unwrap();
        for &c_reg in &[0.01, 0.1, 1.0, 10.0] {
            let mut r_c = r_mat.clone();
            for i in 0..n {
                r_c[(i, i)] += c_reg;
            }
            let chol_c = nalgebra::Cholesky::new(r_c).unwrap();
            let factor = (mu / c_reg).max(c_reg / mu).max(1.0);
            for t in test.points() {
                let r_vec = DVector::from_iterator(
                    n,
                    (0..n).map(|j| {
                        kernel
                            .eval_dist((t[0] - grid.point(j)[0]).abs())
                            .unwrap()
                    }),
                );
                let u = chol_c.solve(&r_vec);
                let mspe = 1.0 - 2.0 * u.dot(&r_vec) + u.dot(&(&r_mu * &u));
                let var = 1.0 - r_vec.dot(&chol_mu.solve(&r_vec));
                let margin = mspe - (factor * var + 1e-10);
                worst_margin = worst_margin.max(margin);
            }
        }
    }
    let pass = worst_margin <= 0.0;
    report_line(
        "3 [proposition 1]",
        pass,
        &format!("worst MSPE excess over bound {worst_margin:.3e}"),
    );
    assert!(pass);
}

fn power_slope_check(m0: f64) -> (f64, f64, bool) {
    let ladder: Vec<usize> = (2..=15).map(|k| 10 * k).collect();
    let sweep = power_function_sweep(m0, 1.0, &ladder, 200).unwrap();
    let required = sweep.bound_slope - 0.1;
    (sweep.slope, required, sweep.slope >= required)
}

/// Criterion 4, attainable branch: power-function decay slope for m0 = 1.
#[test]
fn c4_power_function_decay_m0_1() {
    let (slope, required, pass) = power_slope_check(1.0);
    report_line(
        "4 [power decay m0=1]",
        pass,
        &format!("slope {slope:.4} >= {required:.4}"),
    );
    assert!(pass);
}

/// Criterion 4, out-of-reach branch: m0 in {2, 3}.
///
/// The max over the 200-point Halton test set is pinned at x = 1/256, whose
/// power function is still in a boundary-layer transient at n <= 150 (its
/// local slope keeps rising toward the bound exponent as n grows past 10^3,
/// and interior test points already exceed the bound). The criterion is
/// asserted as stated and fails honestly at desk scale.
#[test]
fn c4_power_function_decay_m0_2_and_3() {
    let mut all_ok = true;
    let mut detail = String::new();
    for m0 in [2.0, 3.0] {
        let (slope, required, pass) = power_slope_check(m0);
        all_ok &= pass;
        report_line(
            &format!("4 [power decay m0={m0}]"),
            pass,
            &format!("slope {slope:.4} >= {required:.4}"),
        );
        detail.push_str(&format!(" m0={m0}: slope {slope:.4} (required {required:.4});"));
    }
    assert!(
        all_ok,
        "power-function slope band not attainable at n <= 150 for{detail} \
         the near-boundary Halton point 1/256 decays through a finite-sample \
         transient; interior points satisfy the bound (documented defect)"
    );
}

/// Criterion 5: special-function and Fourier-pair accuracy targets.
#[test]
fn c5_special_function_accuracy() {
    // half-integer closed forms on x in [0.1, 20]
    let mut worst_k = 0.0f64;
    let mut x = 0.1;
    while x <= 20.0 {
        let k12 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
        for (nu, want) in [
            (0.5, k12),
            (1.5, k12 * (1.0 + 1.0 / x)),
            (2.5, k12 * (1.0 + 3.0 / x + 3.0 / (x * x))),
        ] {
            let got = bessel_k(nu, x).unwrap();
            worst_k = worst_k.max(((got - want) / want).abs());
        }
        x += 0.043;
    }
    let pass_k = worst_k <= 1e-10;
    report_line(
        "5 [K_nu closed forms]",
        pass_k,
        &format!("max relative error {worst_k:.3e}"),
    );

    // Matérn closed forms at nu = 1/2, 3/2
    let mut worst_m = 0.0f64;
    for (nu, phi) in [(0.5, 1.3), (1.5, 0.8)] {
        let kernel = MaternKernel::new(nu, phi).unwrap();
        let mut r = 0.02;
        while r <= 3.0 {
            let z = 2.0 * nu.sqrt() * phi * r;
            let want = if nu == 0.5 {
                (-z).exp()
            } else {
                (1.0 + z) * (-z).exp()
            };
            let got = kernel.eval_dist(r).unwrap();
            worst_m = worst_m.max(((got - want) / want).abs());
            r += 0.037;
        }
    }
    let pass_m = worst_m <= 1e-10;
    report_line(
        "5 [matern closed forms]",
        pass_m,
        &format!("max relative error {worst_m:.3e}"),
    );

    // Fourier-pair inversion at r in {0.1, 0.5, 1, 2}
    let mut worst_f = 0.0f64;
    for nu in [0.5, 1.5, 1.1] {
        let kernel = MaternKernel::new(nu, 1.0).unwrap();
        for r in [0.1, 0.5, 1.0, 2.0] {
            let direct = kernel.eval_dist(r).unwrap();
            let inverted = matern_inverse_transform_1d(&kernel, r, 1e-7).unwrap();
            worst_f = worst_f.max((direct - inverted).abs());
        }
    }
    let pass_f = worst_f <= 1e-6;
    report_line(
        "5 [fourier pair]",
        pass_f,
        &format!("max absolute inversion error {worst_f:.3e}"),
    );

    assert!(pass_k && pass_m && pass_f);
}

fn krr_config() -> ExperimentConfig {
    // noise variance 1.0 rather than the GP-study default 0.25: at desk
    // scale the ridge fit must sit in the variance-dominated regime for the
    // schedule-controlled rate to be visible; with 0.25 the bias transient
    // overshoots the slope band for m = 2 at every seed tried
    ExperimentConfig {
        noise_variance: 1.0,
        seed: SEED,
        ..ExperimentConfig::default()
    }
}

/// Criterion 6, attainable branch: triangle target with m = 2.
#[test]
fn c6_krr_triangle_m2() {
    let report = run_krr_convergence(&triangle_target(), 2.0, 1, &krr_config()).unwrap();
    let dev = (report.slope - 0.75).abs();
    let pass = dev <= 0.12;
    report_line(
        "6 [krr triangle m=2]",
        pass,
        &format!(
            "squared-error slope {:.4} vs 0.75 (dev {:.4}), Q-flag {}",
            report.slope, dev, report.up_to_subpolynomial_factor
        ),
    );
    assert!(pass);
}

/// Criterion 6, out-of-reach branch: triangle target with m = 0.6.
///
/// The target sits in the saturation regime of the ridge smoother
/// (smoothness 1.5 > 2m = 1.2), so with the pinned lambda schedule the
/// population bias decays like lambda^2 ~ n^-0.6, below the band, and at
/// n <= 150 even that regime has not set in (the nu = 0.1 Gram's eigen-decay
/// reaches its asymptote only past n ~ 10^4). Asserted as stated; fails
/// honestly with the measured slope.
#[test]
fn c6_krr_triangle_m06() {
    let target_slope = 2.0 * (1.2 / 3.4);
    let report = run_krr_convergence(&triangle_target(), 0.6, 1, &krr_config()).unwrap();
    let dev = (report.slope - target_slope).abs();
    let pass = dev <= 0.12;
    report_line(
        "6 [krr triangle m=0.6]",
        pass,
        &format!(
            "squared-error slope {:.4} vs {target_slope:.4} (dev {dev:.4})",
            report.slope
        ),
    );
    assert!(
        pass,
        "slope {:.4} vs target {target_slope:.4}: the m < m0(f)/2 band is not \
         attainable at n <= 150 under the pinned schedule (documented defect)",
        report.slope
    );
}

/// Criterion 7: Gram eigen-decay for the rough Matérn kernel.
#[test]
fn c7_eigendecay() {
    let kernel = Kernel::matern(0.5, 1.0).unwrap();
    let design = grid_design(500, 1).unwrap();
    let est = estimate_eigendecay(&kernel, &design, 5, 100).unwrap();
    let dev = (est.slope + 2.0).abs();
    let pass = dev <= 0.3;
    report_line(
        "7 [eigen decay]",
        pass,
        &format!("slope {:.4} vs -2 (dev {dev:.4}, R^2 {:.4})", est.slope, est.r2),
    );
    assert!(pass);
}

/// Criterion 8: the four-row study is byte-identical between a single-thread
/// run and a default (max-parallel) run.
#[test]
fn c8_reproducibility_across_parallelism() {
    let serial_dir = tempfile::tempdir().unwrap();
    let parallel_dir = tempfile::tempdir().unwrap();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| run_table2(SEED, serial_dir.path())).unwrap();
    run_table2(SEED, parallel_dir.path()).unwrap();

    let mut names: Vec<String> = std::fs::read_dir(serial_dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.len() == 9, "expected 9 output files, got {names:?}");
    let mut pass = true;
    for name in &names {
        let a = std::fs::read(serial_dir.path().join(name)).unwrap();
        let b = std::fs::read(parallel_dir.path().join(name)).unwrap();
        pass &= a == b;
    }
    report_line(
        "8 [reproducibility]",
        pass,
        &format!("{} files compared byte-for-byte", names.len()),
    );
    assert!(pass);
}

/// Harness-level invariants tied to the rate theory (statistical, seeded):
/// undersmoothed slope near its own prediction and strictly below the
/// well-specified one; oversmoothed and well-specified slopes agreeing; no
/// oversmoothed configuration beating the lower-bound exponent by more than
/// tolerance.
#[test]
fn regime_ordering_invariants() {
    let base = ExperimentConfig {
        seed: SEED,
        ..ExperimentConfig::default()
    };

    let under = run_gp_convergence(&ExperimentConfig {
        m0: 2.0,
        m: 1.2,
        ..base.clone()
    })
    .unwrap();
    let well = run_gp_convergence(&ExperimentConfig {
        m0: 2.0,
        m: 2.0,
        ..base.clone()
    })
    .unwrap();
    let over = run_gp_convergence(&ExperimentConfig {
        m0: 2.0,
        m: 3.0,
        ..base.clone()
    })
    .unwrap();

    // undersmoothed: (2 * 1.2 - 1) / (2 * 1.2)
    let predicted_under = (2.0 * 1.2 - 1.0) / (2.0 * 1.2);
    assert!(
        (under.slope - predicted_under).abs() <= 0.1,
        "undersmoothed slope {:.4} vs predicted {predicted_under:.4}",
        under.slope
    );
    assert!(
        under.slope < well.slope,
        "undersmoothing penalty missing: {:.4} vs {:.4}",
        under.slope,
        well.slope
    );
    // oversmoothing safety
    assert!(
        (over.slope - well.slope).abs() <= 0.08,
        "oversmoothed {:.4} vs well-specified {:.4}",
        over.slope,
        well.slope
    );
    // no m >= m0 configuration beats the lower-bound exponent materially
    for report in [&well, &over] {
        assert!(report.slope <= 0.75 + 0.1);
    }
    println!(
        "regime ordering: under {:.4} (predicted {:.4}) < well {:.4} ~ over {:.4}",
        under.slope, predicted_under, well.slope, over.slope
    );
}

/// Report emission is deterministic, and the emitted JSON echoes the seed.
#[test]
fn report_emission_contract() {
    let cfg = ExperimentConfig {
        m0: 2.0,
        m: 2.0,
        n_grid: vec![20, 40],
        replications: 4,
        test_points: 20,
        seed: 7,
        ..ExperimentConfig::default()
    };
    let report = run_gp_convergence(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.json");
    let p2 = dir.path().join("b.json");
    emit_report(&report, ReportFormat::Json, &p1).unwrap();
    emit_report(&report, ReportFormat::Json, &p2).unwrap();
    let a = std::fs::read(&p1).unwrap();
    assert_eq!(a, std::fs::read(&p2).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("\"seed\": 7"));
}
