//! Factorial simulation study: Soft-SVM against logistic regression over a
//! grid of imbalance and noise levels, scored by held-out MCC.

use std::io::Write;

use rayon::prelude::*;

use super::{simulate_mixture, SimSpec};
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate, evaluate, CvOptions};
use crate::solver::{fit_dataset, FitConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Soft-SVM with the penalty chosen by cross-validation.
    SoftSvm,
    /// `kappa = 1`, `alpha = 0` with a fixed penalty.
    Logistic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::SoftSvm => "softsvm",
            Method::Logistic => "logistic",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FactorialConfig {
    pub rhos: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub base_seed: u64,
    pub lambda_grid: Vec<f64>,
    pub cv_folds: usize,
    pub cv_reps: usize,
    pub softsvm: FitConfig,
    pub logistic_lambda: f64,
    pub parallel: bool,
}

impl Default for FactorialConfig {
    fn default() -> Self {
        Self {
            rhos: vec![0.125, 0.25, 0.5],
            sigmas: vec![0.5, 1.0, 1.5],
            n: 100,
            reps: 50,
            base_seed: 0,
            lambda_grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2],
            cv_folds: 10,
            cv_reps: 1,
            softsvm: FitConfig::default(),
            logistic_lambda: 0.0,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorialRow {
    pub rho: f64,
    pub sigma: f64,
    pub rep: usize,
    pub method: Method,
    /// Held-out MCC; `None` if the cell failed.
    pub mcc: Option<f64>,
    pub converged: bool,
    pub coef_norm: Option<f64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for cell `(rho index, sigma index, rep)`.
pub fn cell_seed(base: u64, ri: usize, si: usize, rep: usize) -> u64 {
    [ri, si, rep].iter().fold(splitmix64(base), |acc, &v| splitmix64(acc ^ v as u64))
}

struct Cell {
    rho: f64,
    sigma: f64,
    rep: usize,
    seed: u64,
}

pub fn run_factorial(cfg: &FactorialConfig) -> Result<Vec<FactorialRow>> {
    if cfg.rhos.is_empty() || cfg.sigmas.is_empty() || cfg.reps == 0 {
        return Err(Error::Config("factorial design needs nonempty grids and reps > 0".into()));
    }
    for &rho in &cfg.rhos {
        for &sigma in &cfg.sigmas {
            SimSpec { n: cfg.n, rho, sigma, seed: 0 }.validate()?;
        }
    }
    cfg.softsvm.validate()?;
    FitConfig::logistic(cfg.logistic_lambda).validate()?;

    let mut cells = Vec::new();
    for (ri, &rho) in cfg.rhos.iter().enumerate() {
        for (si, &sigma) in cfg.sigmas.iter().enumerate() {
            for rep in 0..cfg.reps {
                cells.push(Cell { rho, sigma, rep, seed: cell_seed(cfg.base_seed, ri, si, rep) });
            }
        }
    }
    let run = |c: &Cell| run_cell(cfg, c);
    let rows: Vec<[FactorialRow; 2]> =
        if cfg.parallel { cells.par_iter().map(run).collect() } else { cells.iter().map(run).collect() };
    Ok(rows.into_iter().flatten().collect())
}

fn run_cell(cfg: &FactorialConfig, c: &Cell) -> [FactorialRow; 2] {
    let row = |method, outcome: Result<(f64, bool, f64)>| {
        let (mcc, converged, coef_norm) = match outcome {
            Ok((m, conv, norm)) => (Some(m), conv, Some(norm)),
            Err(_) => (None, false, None),
        };
        FactorialRow { rho: c.rho, sigma: c.sigma, rep: c.rep, method, mcc, converged, coef_norm }
    };
    let spec = |seed| SimSpec { n: cfg.n, rho: c.rho, sigma: c.sigma, seed };
    let data = simulate_mixture(&spec(c.seed)).and_then(|train| {
        let test = simulate_mixture(&spec(splitmix64(c.seed ^ 0x7e57)))?;
        Ok((train, test))
    });
    let (train, test) = match data {
        Ok(d) => d,
        Err(_) => return [row(Method::SoftSvm, Err(Error::Singular)), row(Method::Logistic, Err(Error::Singular))],
    };
    let score = |fit_cfg: &FitConfig| -> Result<(f64, bool, f64)> {
        let model = fit_dataset(&train, fit_cfg, true)?;
        let e = evaluate(&model, &test.features, &test.labels)?;
        Ok((e.mcc, model.converged, model.coef_norm()))
    };
    let soft = (|| {
        let opts = CvOptions {
            folds: cfg.cv_folds,
            reps: cfg.cv_reps,
            seed: splitmix64(c.seed ^ 0xc5),
            standardize: true,
            parallel: false,
        };
        let report = cross_validate(&train, &cfg.softsvm, &cfg.lambda_grid, &opts)?;
        score(&cfg.softsvm.clone().with_lambda(report.selected_lambda))
    })();
    let logistic = score(&FitConfig::logistic(cfg.logistic_lambda));
    [row(Method::SoftSvm, soft), row(Method::Logistic, logistic)]
}

/// Writes `rho,sigma,rep,method,mcc,converged,coef_norm`; failed cells have
/// `NA` metrics.
pub fn write_factorial_csv<W: Write>(writer: W, rows: &[FactorialRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rho", "sigma", "rep", "method", "mcc", "converged", "coef_norm"])?;
    let na = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
    for r in rows {
        w.write_record([
            r.rho.to_string(),
            r.sigma.to_string(),
            r.rep.to_string(),
            r.method.as_str().to_string(),
            na(r.mcc),
            r.converged.to_string(),
            na(r.coef_norm),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
