//! Command-line front end for the convergence laboratory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kernelab::harness::{
    self, ExperimentConfig, NoiseKind, ReportFormat,
};
use kernelab::kernels::{matern_inverse_transform_1d, MaternKernel};
use kernelab::rates;
use kernelab::specfun;

#[derive(Parser)]
#[command(
    name = "kernelab",
    about = "Convergence-rate experiments for (mis)specified kernel regression",
    version
)]
struct Cli {
    /// Limit the rayon thread pool (0 = default parallelism)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gaussian-process convergence study over a ladder of sample sizes
    GpConvergence(GpArgs),
    /// Deterministic-target ridge convergence study
    KrrConvergence(KrrArgs),
    /// Run all four headline (m0, m) rows and write a combined summary
    Table2(Table2Args),
    /// Power-function decay sweep at fixed mu1
    PowerFunction(PowerArgs),
    /// Closed-form and Fourier-pair validation suite (nonzero exit on failure)
    KernelCheck,
}

#[derive(Args)]
struct ConfigOverrides {
    /// JSON config file mirroring the flags; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m0: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    /// Sample-size ladder as lo:hi:step
    #[arg(long, value_name = "LO:HI:STEP")]
    n_grid: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    noise_var: Option<f64>,
    #[arg(long)]
    mu_base: Option<f64>,
    #[arg(long)]
    phi_true: Option<f64>,
    #[arg(long)]
    phi_imposed: Option<f64>,
    #[arg(long)]
    test_points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Noise family: gaussian | uniform | twopoint
    #[arg(long)]
    noise: Option<String>,
}

impl ConfigOverrides {
    fn build(&self) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                serde_json::from_str(&text)
                    .map_err(|e| format!("cannot parse {}: {e}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.m0 {
            cfg.m0 = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.d {
            cfg.d = v;
        }
        if let Some(spec) = &self.n_grid {
            cfg.n_grid = parse_ladder(spec)?;
        }
        if let Some(v) = self.reps {
            cfg.replications = v;
        }
        if let Some(v) = self.noise_var {
            cfg.noise_variance = v;
        }
        if let Some(v) = self.mu_base {
            cfg.mu_base = v;
        }
        if let Some(v) = self.phi_true {
            cfg.phi_true = v;
        }
        if let Some(v) = self.phi_imposed {
            cfg.phi_imposed = v;
        }
        if let Some(v) = self.test_points {
            cfg.test_points = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(kind) = &self.noise {
            cfg.noise = match kind.as_str() {
                "gaussian" => NoiseKind::Gaussian,
                "uniform" => NoiseKind::Uniform,
                "twopoint" => NoiseKind::TwoPoint,
                other => return Err(format!("unknown noise kind '{other}'")),
            };
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct GpArgs {
    #[command(flatten)]
    overrides: ConfigOverrides,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: ReportFormat,
}

#[derive(Args)]
struct KrrArgs {
    /// Target function: triangle | zero
    #[arg(long, default_value = "triangle")]
    target: String,
    #[command(flatten)]
    overrides: ConfigOverrides,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: ReportFormat,
}

#[derive(Args)]
struct Table2Args {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory for per-row reports and summary.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long)]
    m0: f64,
    #[arg(long, default_value_t = 1.0)]
    mu1: f64,
    #[arg(long, value_name = "LO:HI:STEP", default_value = "20:150:10")]
    n_grid: String,
    #[arg(long, default_value_t = 200)]
    test_points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_ladder(spec: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("n-grid must be lo:hi:step, got '{spec}'"));
    }
    let lo: usize = parts[0].parse().map_err(|e| format!("bad lo: {e}"))?;
    let hi: usize = parts[1].parse().map_err(|e| format!("bad hi: {e}"))?;
    let step: usize = parts[2].parse().map_err(|e| format!("bad step: {e}"))?;
    if step == 0 || hi < lo {
        return Err(format!("degenerate ladder '{spec}'"));
    }
    Ok((lo..=hi).step_by(step).collect())
}

fn print_report(report: &harness::ConvergenceReport) {
    println!("{:>6} {:>14} {:>12}", "n", "mean_sq_error", "stderr");
    for row in &report.rows {
        println!(
            "{:>6} {:>14.6e} {:>12.3e}",
            row.n, row.mean_sq_error, row.stderr
        );
    }
    println!(
        "slope = {:.4}  theory = {:.4}  difference = {:+.4}  R^2 = {:.4}{}",
        report.slope,
        report.theoretical_slope,
        report.difference,
        report.r2,
        if report.up_to_subpolynomial_factor {
            "  (rate holds up to a sub-polynomial factor)"
        } else {
            ""
        }
    );
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::GpConvergence(args) => {
            let cfg = args.overrides.build()?;
            let report = harness::run_gp_convergence(&cfg).map_err(|e| e.to_string())?;
            print_report(&report);
            if let Some(path) = args.out {
                harness::emit_report(&report, args.format, &path).map_err(|e| e.to_string())?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::KrrConvergence(args) => {
            let target = match args.target.as_str() {
                "triangle" => rates::triangle_target(),
                "zero" => rates::zero_target(),
                other => return Err(format!("unknown target '{other}' (triangle|zero)")),
            };
            let cfg = args.overrides.build()?;
            let report = harness::run_krr_convergence(&target, cfg.m, cfg.d, &cfg)
                .map_err(|e| e.to_string())?;
            print_report(&report);
            if let Some(path) = args.out {
                harness::emit_report(&report, args.format, &path).map_err(|e| e.to_string())?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Table2(args) => {
            let summary = harness::run_table2(args.seed, &args.out).map_err(|e| e.to_string())?;
            println!(
                "{:>5} {:>5} {:>16} {:>18} {:>11} {:>8}",
                "m0", "m", "estimated slope", "theoretical slope", "difference", "R^2"
            );
            for row in &summary.rows {
                println!(
                    "{:>5} {:>5} {:>16.4} {:>18.4} {:>11.4} {:>8.4}",
                    row.m0, row.m, row.estimated_slope, row.theoretical_slope, row.difference,
                    row.r2
                );
            }
            println!("wrote {}", args.out.join("summary.json").display());
            Ok(())
        }
        Command::PowerFunction(args) => {
            let ladder = parse_ladder(&args.n_grid)?;
            let sweep =
                harness::power_function_sweep(args.m0, args.mu1, &ladder, args.test_points)
                    .map_err(|e| e.to_string())?;
            println!("{:>6} {:>14}", "n", "max_power");
            for row in &sweep.rows {
                println!("{:>6} {:>14.6e}", row.n, row.max_power);
            }
            println!(
                "slope = {:.4}  bound exponent (1 - d/(2 m0)) = {:.4}",
                sweep.slope, sweep.bound_slope
            );
            if let Some(path) = args.out {
                let text = serde_json::to_string_pretty(&sweep).map_err(|e| e.to_string())?;
                std::fs::write(&path, text + "\n").map_err(|e| e.to_string())?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::KernelCheck => kernel_check(),
    }
}

/// Closed-form and Fourier-pair validation suite.
fn kernel_check() -> Result<(), String> {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // half-integer K_nu closed forms
    for (nu, label) in [(0.5, "K_1/2"), (1.5, "K_3/2"), (2.5, "K_5/2")] {
        let mut worst = 0.0f64;
        let mut x = 0.1;
        while x <= 20.0 {
            let k12 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
            let want = match label {
                "K_1/2" => k12,
                "K_3/2" => k12 * (1.0 + 1.0 / x),
                _ => k12 * (1.0 + 3.0 / x + 3.0 / (x * x)),
            };
            let got = specfun::bessel_k(nu, x).map_err(|e| e.to_string())?;
            worst = worst.max(((got - want) / want).abs());
            x += 0.05;
        }
        check(label, worst <= 1e-10, format!("max relative error {worst:.2e}"));
    }

    // Matérn closed forms at nu = 1/2 and 3/2
    for (nu, label) in [(0.5, "matern_1/2"), (1.5, "matern_3/2")] {
        let k = MaternKernel::new(nu, 1.0).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        let mut r = 0.01;
        while r <= 3.0 {
            let z = 2.0 * nu.sqrt() * r;
            let want = if nu == 0.5 {
                (-z).exp()
            } else {
                (1.0 + z) * (-z).exp()
            };
            let got = k.eval_dist(r).map_err(|e| e.to_string())?;
            worst = worst.max(((got - want) / want).abs());
            r += 0.03;
        }
        check(label, worst <= 1e-10, format!("max relative error {worst:.2e}"));
    }

    // Fourier-pair inversion at representative smoothnesses
    for nu in [0.5, 1.5, 1.1] {
        let k = MaternKernel::new(nu, 1.0).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for r in [0.1, 0.5, 1.0, 2.0] {
            let direct = k.eval_dist(r).map_err(|e| e.to_string())?;
            let inverted = matern_inverse_transform_1d(&k, r, 1e-7).map_err(|e| e.to_string())?;
            worst = worst.max((direct - inverted).abs());
        }
        check(
            &format!("fourier_pair_nu_{nu}"),
            worst <= 1e-6,
            format!("max absolute inversion error {worst:.2e}"),
        );
    }

    // Beta-function identities
    {
        let b = specfun::log_beta(2.0, 3.0).map_err(|e| e.to_string())?;
        let ok = (b - (1.0f64 / 12.0).ln()).abs() < 1e-12;
        check("log_beta", ok, format!("log B(2,3) = {b:.15}"));
    }

    if failures > 0 {
        Err(format!("{failures} kernel check(s) failed"))
    } else {
        println!("all kernel checks passed");
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("cannot configure thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
