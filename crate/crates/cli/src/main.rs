#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use softsvm::data::{
    load_csv, load_features, run_factorial, simulate_mixture, write_factorial_csv, FactorialConfig, LabelRule, SimSpec,
};
use softsvm::evaluation::{cross_validate, CvOptions};
use softsvm::family::delta_of_kappa;
use softsvm::model::{diagnose, write_predictions, DiagnosticThresholds};
use softsvm::solver::fit_dataset;
use softsvm::{Error, FamilyParams, FitConfig, FittedModel};

mod grid;

/// A parsed numeric list, kept whole so clap treats it as one value.
#[derive(Clone)]
struct Values(Vec<f64>);

fn log_grid(s: &str) -> Result<Values, String> {
    grid::parse_log_grid(s).map(Values)
}

fn range(s: &str) -> Result<Values, String> {
    grid::parse_range(s).map(Values)
}

fn list(s: &str) -> Result<Values, String> {
    grid::parse_list(s).map(Values)
}

/// Soft-SVM regression: simulate, fit, predict, cross-validate.
#[derive(Parser)]
#[command(name = "softsvm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a two-class Gaussian mixture and write it as CSV.
    Simulate(SimulateArgs),
    /// Fit a model and write it as JSON.
    Fit(FitArgs),
    /// Predict means, labels and point diagnostics for new rows.
    Predict(PredictArgs),
    /// Cross-validate the ridge penalty over a log grid.
    Cv(CvArgs),
    /// Tabulate cumulant, mean and variance curves of one family member.
    Curves(CurvesArgs),
    /// Run the simulated factorial comparison against logistic regression.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long, default_value = "y")]
    label_col: String,
    /// Label value that marks the positive class.
    #[arg(long, conflicts_with = "threshold")]
    positive: Option<String>,
    /// Numeric labels at or above this value are positive.
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
}

impl LabelArgs {
    fn rule(&self) -> LabelRule {
        match (&self.positive, self.threshold) {
            (Some(p), _) => LabelRule::Equals(p.clone()),
            (None, Some(t)) => LabelRule::AtLeast(t),
            (None, None) => LabelRule::Binary,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    labels: LabelArgs,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long)]
    fix_kappa: Option<f64>,
    #[arg(long)]
    fix_alpha: Option<f64>,
    #[arg(long)]
    no_standardize: bool,
    /// Cap on outer cyclic iterations.
    #[arg(long, default_value_t = FitConfig::default().max_outer_iters)]
    max_iters: usize,
    /// Exit with status 3 if the fit does not converge.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Column dropped from the input if present.
    #[arg(long, default_value = "y")]
    label_col: String,
    #[arg(long, default_value_t = DiagnosticThresholds::default().v_threshold)]
    v_threshold: f64,
    #[arg(long, default_value_t = DiagnosticThresholds::default().mu_band)]
    mu_band: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    labels: LabelArgs,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    /// Log-spaced penalty grid `lo:hi:count`.
    #[arg(long, default_value = "1e-4:1e2:13", value_parser = log_grid)]
    grid: Values,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_standardize: bool,
    /// JSON report; the flat CSV goes next to it with a `.csv` extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[group(id = "shape", multiple = false)]
struct ShapeArgs {
    #[arg(long, group = "shape")]
    alpha: Option<f64>,
    /// Separation `delta = alpha / kappa`.
    #[arg(long, group = "shape")]
    delta: Option<f64>,
    /// Use `delta = 1 - 1/kappa`.
    #[arg(long, group = "shape")]
    delta_of_kappa: bool,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long)]
    kappa: f64,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Theta grid `lo:hi:step`.
    #[arg(long, default_value = "-6:6:0.01", allow_hyphen_values = true, value_parser = range)]
    range: Values,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "0.125,0.25,0.5", value_parser = list)]
    rhos: Values,
    #[arg(long, default_value = "0.5,1,1.5", value_parser = list)]
    sigmas: Values,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Penalty grid for the inner cross-validation of each Soft-SVM fit.
    #[arg(long, default_value = "1e-4:1e2:7", value_parser = log_grid)]
    grid: Values,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Exit with status 3 if any cell failed or did not converge.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> softsvm::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn simulate(a: SimulateArgs) -> Outcome {
    let spec = SimSpec { n: a.n, rho: a.rho, sigma: a.sigma, seed: a.seed };
    spec.validate()?;
    let d = simulate_mixture(&spec)?;
    write(&a.out, csv_bytes(|b| d.write_csv(b, "y"))?)?;
    println!("n1 = {}, n2 = {}", spec.n_class0(), spec.n_class1());
    Ok(())
}

fn fit(a: FitArgs) -> Outcome {
    let cfg = FitConfig {
        lambda: a.lambda,
        fix_kappa: a.fix_kappa,
        fix_alpha: a.fix_alpha,
        max_outer_iters: a.max_iters,
        ..FitConfig::default()
    };
    cfg.validate()?;
    let d = load_csv(&a.data, &a.labels.label_col, &a.labels.rule())?;
    let m = fit_dataset(&d, &cfg, !a.no_standardize)?;
    write(&a.out, m.to_json()?)?;
    println!(
        "kappa = {}, alpha = {}, loglik = {}, iterations = {}, converged = {}",
        m.kappa_hat(),
        m.alpha_hat(),
        m.penalized_loglik,
        m.n_iters,
        m.converged
    );
    if a.strict && !m.converged {
        return Err(Failure::NotConverged(format!("no convergence after {} iterations", m.n_iters)));
    }
    Ok(())
}

fn predict(a: PredictArgs) -> Outcome {
    let th = DiagnosticThresholds { v_threshold: a.v_threshold, mu_band: a.mu_band };
    let m = FittedModel::load(&a.model)?;
    let (_, x) = load_features(&a.data, Some(&a.label_col))?;
    let diags = diagnose(&m, &x, &th)?;
    write(&a.out, csv_bytes(|b| write_predictions(b, &diags))?)
}

fn cv_csv_path(out: &Path) -> PathBuf {
    let p = out.with_extension("csv");
    if p == out {
        PathBuf::from(format!("{}.csv", out.display()))
    } else {
        p
    }
}

fn cv(a: CvArgs) -> Outcome {
    let opts = CvOptions { folds: a.folds, reps: a.reps, seed: a.seed, standardize: !a.no_standardize, parallel: true };
    if opts.folds < 2 || opts.reps == 0 {
        return Err(Failure::Usage("need --folds >= 2 and --reps >= 1".into()));
    }
    let d = load_csv(&a.data, &a.labels.label_col, &a.labels.rule())?;
    let report = cross_validate(&d, &FitConfig::default(), &a.grid.0, &opts)?;
    let json = report.to_json()?;
    let flat = csv_bytes(|b| report.write_csv(b))?;
    write(&a.out, json)?;
    write(&cv_csv_path(&a.out), flat)?;
    println!("selected lambda = {}", report.selected_lambda);
    Ok(())
}

fn curves(a: CurvesArgs) -> Outcome {
    let p = match (a.shape.alpha, a.shape.delta, a.shape.delta_of_kappa) {
        (Some(alpha), _, _) => FamilyParams::new(a.kappa, alpha),
        (None, Some(delta), _) => FamilyParams::from_delta(a.kappa, delta),
        (None, None, true) => {
            if !(a.kappa >= 1.0) {
                return Err(Failure::Usage(format!("delta = 1 - 1/kappa needs kappa >= 1, got {}", a.kappa)));
            }
            FamilyParams::from_delta(a.kappa, delta_of_kappa(a.kappa))
        }
        (None, None, false) => FamilyParams::new(a.kappa, 0.0),
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let m = a.range.0.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    let e = |e: csv::Error| Failure::Data(e.to_string());
    w.write_record(["theta", "cumulant", "mean", "variance", "mu", "variance_of_mean"]).map_err(e)?;
    for (i, &t) in a.range.0.iter().enumerate() {
        let mu = (i + 1) as f64 / (m + 1) as f64;
        let v = p.variance_of_mean(mu)?;
        let row = [t, p.cumulant(t), p.mean(t), p.variance_at_theta(t), mu, v];
        w.write_record(row.iter().map(|x| format!("{x:.16e}"))).map_err(e)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Data(e.to_string()))?;
    write(&a.out, bytes)
}

fn bench(a: BenchArgs) -> Outcome {
    let cfg = FactorialConfig {
        rhos: a.rhos.0,
        sigmas: a.sigmas.0,
        n: a.n,
        reps: a.reps,
        base_seed: a.seed,
        lambda_grid: a.grid.0,
        cv_folds: a.folds,
        ..FactorialConfig::default()
    };
    let rows = run_factorial(&cfg)?;
    write(&a.out, csv_bytes(|b| write_factorial_csv(b, &rows))?)?;
    let bad = rows.iter().filter(|r| r.mcc.is_none() || !r.converged).count();
    println!("{} rows, {bad} failed or unconverged", rows.len());
    if a.strict && bad > 0 {
        return Err(Failure::NotConverged(format!("{bad} cells failed or did not converge")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Cv(a) => cv(a),
        Command::Curves(a) => curves(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::NotConverged(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
