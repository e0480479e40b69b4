//! Penalized Soft-SVM regression by cyclic scoring.
//!
//! Each outer cycle performs, in order, a safeguarded Newton update of the
//! softness `kappa`, one of the scaled separation `alpha`, and a penalized
//! Newton/IRLS update of the coefficients. Every accepted move is an ascent
//! move on the penalized log-likelihood
//!
//! ```text
//! l(beta, kappa, alpha) = sum_i y_i f(eta_i) - b(f(eta_i)) - lambda/2 |beta_{1..f}|^2
//! ```
//!
//! so the objective sequence recorded by [`fit_traced`] is nondecreasing. The
//! loop stops once the relative change of the objective over a cycle drops
//! below `epsilon`, or after `max_outer_iters` cycles.

mod fitted;
mod linalg;

use nalgebra::{DMatrix, DVector};

use crate::data::{self, Dataset, Standardization};
use crate::error::{Error, Result};
use crate::family::FamilyParams;

pub use fitted::FittedModel;
pub use linalg::{solve_penalized_system, JITTER_FLOOR};

/// Maximum number of step halvings in the coefficient update.
pub const MAX_HALVINGS: usize = 30;

/// Below this magnitude a finite-difference score is treated as zero.
pub const SCORE_TOL: f64 = 1e-10;

/// Weights used in the coefficient update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// Negated observed Hessian weights, `f'^2 b'' - (y - mu) f''`.
    #[default]
    Observed,
    /// Fisher scoring weights, `f'^2 b''`.
    Expected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Ridge penalty on the non-intercept coefficients.
    pub lambda: f64,
    /// Relative convergence tolerance on the objective.
    pub epsilon: f64,
    /// Label perturbation used to build the starting means.
    pub nu: f64,
    pub max_outer_iters: usize,
    /// Cap on bracketing and golden-section evaluations in a kappa/alpha step.
    pub max_newton_iters: usize,
    pub kappa_bounds: (f64, f64),
    pub alpha_bounds: (f64, f64),
    pub fix_kappa: Option<f64>,
    pub fix_alpha: Option<f64>,
    pub weight_mode: WeightMode,
    /// Relative step for the finite-difference kappa/alpha derivatives.
    pub fd_step: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            epsilon: 1e-8,
            nu: 0.05,
            max_outer_iters: 100,
            max_newton_iters: 25,
            kappa_bounds: (1e-2, 1e4),
            alpha_bounds: (0.0, 50.0),
            fix_kappa: None,
            fix_alpha: None,
            weight_mode: WeightMode::Observed,
            fd_step: 1e-5,
        }
    }
}

impl FitConfig {
    /// Ordinary logistic regression: `kappa = 1`, `alpha = 0` held fixed.
    pub fn logistic(lambda: f64) -> Self {
        Self { lambda, fix_kappa: Some(1.0), fix_alpha: Some(0.0), ..Self::default() }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be non-negative, got {}", self.lambda));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return bad(format!("nu must lie in (0, 1), got {}", self.nu));
        }
        if self.max_outer_iters == 0 || self.max_newton_iters == 0 {
            return bad("iteration caps must be positive".into());
        }
        if !(self.fd_step > 0.0 && self.fd_step < 1.0) {
            return bad(format!("fd_step must lie in (0, 1), got {}", self.fd_step));
        }
        let (klo, khi) = self.kappa_bounds;
        if !(klo > 0.0 && klo <= khi && khi.is_finite()) {
            return bad(format!("invalid kappa bounds [{klo}, {khi}]"));
        }
        let (alo, ahi) = self.alpha_bounds;
        if !(alo >= 0.0 && alo <= ahi && ahi.is_finite()) {
            return bad(format!("invalid alpha bounds [{alo}, {ahi}]"));
        }
        if let Some(k) = self.fix_kappa {
            if !(k >= klo && k <= khi) {
                return bad(format!("fixed kappa {k} outside [{klo}, {khi}]"));
            }
        }
        if let Some(a) = self.fix_alpha {
            if !(a >= alo && a <= ahi) {
                return bad(format!("fixed alpha {a} outside [{alo}, {ahi}]"));
            }
        }
        Ok(())
    }
}

/// Validated `(X, y, lambda)` triple.
struct Problem<'a> {
    x: &'a DMatrix<f64>,
    y: &'a [u8],
    lambda: f64,
}

impl<'a> Problem<'a> {
    fn new(x: &'a DMatrix<f64>, y: &'a [u8], lambda: f64) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::Data("no observations".into()));
        }
        if x.nrows() != y.len() {
            return Err(Error::Shape(format!("design has {} rows but {} labels", x.nrows(), y.len())));
        }
        if x.ncols() == 0 || x.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::Shape("design matrix must start with an intercept column of ones".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("design matrix contains non-finite values".into()));
        }
        if let Some(bad) = y.iter().find(|&&l| l > 1) {
            return Err(Error::Data(format!("label {bad} is not binary")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be non-negative, got {lambda}")));
        }
        Ok(Self { x, y, lambda })
    }

    fn check_beta(&self, beta: &DVector<f64>) -> Result<()> {
        if beta.len() != self.x.ncols() {
            return Err(Error::Shape(format!("{} coefficients for {} design columns", beta.len(), self.x.ncols())));
        }
        Ok(())
    }

    fn penalty(&self, beta: &DVector<f64>) -> f64 {
        0.5 * self.lambda * beta.rows(1, beta.len() - 1).norm_squared()
    }

    fn loglik_at_eta(&self, p: &FamilyParams, eta: &DVector<f64>) -> f64 {
        eta.iter()
            .zip(self.y)
            .map(|(&e, &yi)| {
                let theta = p.theta_from_eta(e);
                f64::from(yi) * theta - p.cumulant(theta)
            })
            .sum()
    }

    fn objective(&self, p: &FamilyParams, beta: &DVector<f64>) -> f64 {
        self.loglik_at_eta(p, &(self.x * beta)) - self.penalty(beta)
    }

    /// `A = X' W X + lambda (0 + I)` and `r = X' (W eta + f' (y - mu))`.
    fn newton_system(&self, p: &FamilyParams, beta: &DVector<f64>, mode: WeightMode) -> (DMatrix<f64>, DVector<f64>) {
        let eta = self.x * beta;
        let n = eta.len();
        let mut w = DVector::zeros(n);
        let mut z = DVector::zeros(n);
        for i in 0..n {
            let e = eta[i];
            let theta = p.theta_from_eta(e);
            let resid = f64::from(self.y[i]) - p.mean(theta);
            let fp = p.f_prime(e);
            let mut wi = fp * fp * p.variance_at_theta(theta);
            if mode == WeightMode::Observed {
                wi -= resid * p.f_second(e);
            }
            w[i] = wi;
            z[i] = wi * e + fp * resid;
        }
        let mut xw = self.x.clone();
        for (i, mut row) in xw.row_iter_mut().enumerate() {
            row *= w[i];
        }
        let mut a = self.x.tr_mul(&xw);
        for j in 1..a.nrows() {
            a[(j, j)] += self.lambda;
        }
        (a, self.x.tr_mul(&z))
    }

    /// One safeguarded coefficient update; returns the new coefficients and
    /// their objective value, never lower than the current one.
    fn beta_step(&self, p: &FamilyParams, beta: &DVector<f64>, mode: WeightMode) -> Result<(DVector<f64>, f64)> {
        let current = self.objective(p, beta);
        let modes: &[WeightMode] = match mode {
            WeightMode::Observed => &[WeightMode::Observed, WeightMode::Expected],
            WeightMode::Expected => &[WeightMode::Expected],
        };
        let mut last_err = None;
        for &m in modes {
            let (a, r) = self.newton_system(p, beta, m);
            let target = match solve_penalized_system(&a, &r) {
                Ok(t) => t,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            last_err = None;
            let dir = target - beta;
            if dir.iter().all(|&d| d == 0.0) {
                return Ok((beta.clone(), current));
            }
            let mut step = 1.0;
            for _ in 0..=MAX_HALVINGS {
                let cand = beta + &dir * step;
                let value = self.objective(p, &cand);
                if value > current {
                    return Ok((cand, value));
                }
                step *= 0.5;
            }
        }
        match last_err {
            Some(e) => Err(e),
            None => Ok((beta.clone(), current)),
        }
    }
}

/// Starting point of the cyclic iteration.
#[derive(Debug, Clone)]
pub struct Initialization {
    pub beta: DVector<f64>,
    /// Linear predictor `g(mu0)` of the perturbed labels.
    pub eta: DVector<f64>,
    pub params: FamilyParams,
}

/// `mu0 = (y + nu) / (1 + 2 nu)`.
pub fn perturbed_mean(y: u8, nu: f64) -> f64 {
    (f64::from(y) + nu) / (1.0 + 2.0 * nu)
}

/// Starting family `(1, 1)` (or the fixed values), linear predictor from the
/// link of the perturbed labels, and coefficients from a ridge least-squares
/// fit of that predictor.
pub fn initialize(x: &DMatrix<f64>, y: &[u8], cfg: &FitConfig) -> Result<Initialization> {
    cfg.validate()?;
    let prob = Problem::new(x, y, cfg.lambda)?;
    let kappa = cfg.fix_kappa.unwrap_or(1.0).clamp(cfg.kappa_bounds.0, cfg.kappa_bounds.1);
    let alpha = cfg.fix_alpha.unwrap_or(1.0).clamp(cfg.alpha_bounds.0, cfg.alpha_bounds.1);
    let params = FamilyParams::new(kappa, alpha)?;
    let eta = y.iter().map(|&yi| params.link(perturbed_mean(yi, cfg.nu))).collect::<Result<Vec<_>>>()?;
    let eta = DVector::from_vec(eta);
    let mut gram = prob.x.tr_mul(prob.x);
    for j in 1..gram.nrows() {
        gram[(j, j)] += cfg.lambda;
    }
    let beta = solve_penalized_system(&gram, &prob.x.tr_mul(&eta))?;
    Ok(Initialization { beta, eta, params })
}

/// Penalized log-likelihood; the intercept is not penalized.
pub fn penalized_loglik(
    params: &FamilyParams,
    beta: &DVector<f64>,
    x: &DMatrix<f64>,
    y: &[u8],
    lambda: f64,
) -> Result<f64> {
    let prob = Problem::new(x, y, lambda)?;
    prob.check_beta(beta)?;
    Ok(prob.objective(params, beta))
}

/// One safeguarded Newton/IRLS update of the coefficients.
///
/// Falls back from observed to expected weights when the observed system is
/// not positive definite or yields no ascent, and halves the step until the
/// objective increases. If nothing increases it, `beta` is returned unchanged.
pub fn beta_step(
    params: &FamilyParams,
    beta: &DVector<f64>,
    x: &DMatrix<f64>,
    y: &[u8],
    lambda: f64,
    mode: WeightMode,
) -> Result<DVector<f64>> {
    let prob = Problem::new(x, y, lambda)?;
    prob.check_beta(beta)?;
    Ok(prob.beta_step(params, beta, mode)?.0)
}

pub fn kappa_step(
    params: &FamilyParams,
    beta: &DVector<f64>,
    x: &DMatrix<f64>,
    y: &[u8],
    lambda: f64,
    cfg: &FitConfig,
) -> Result<f64> {
    let prob = Problem::new(x, y, lambda)?;
    prob.check_beta(beta)?;
    kappa_update(&prob, params, beta, cfg)
}

pub fn alpha_step(
    params: &FamilyParams,
    beta: &DVector<f64>,
    x: &DMatrix<f64>,
    y: &[u8],
    lambda: f64,
    cfg: &FitConfig,
) -> Result<f64> {
    let prob = Problem::new(x, y, lambda)?;
    prob.check_beta(beta)?;
    alpha_update(&prob, params, beta, cfg)
}

fn kappa_update(prob: &Problem, params: &FamilyParams, beta: &DVector<f64>, cfg: &FitConfig) -> Result<f64> {
    if let Some(k) = cfg.fix_kappa {
        return Ok(k);
    }
    let eta = prob.x * beta;
    let pen = prob.penalty(beta);
    let alpha = params.alpha();
    let objective = |k: f64| match FamilyParams::new(k, alpha) {
        Ok(p) => prob.loglik_at_eta(&p, &eta) - pen,
        Err(_) => f64::NEG_INFINITY,
    };
    Ok(scalar_ascent(params.kappa(), cfg.kappa_bounds, cfg.fd_step, cfg.max_newton_iters, objective))
}

fn alpha_update(prob: &Problem, params: &FamilyParams, beta: &DVector<f64>, cfg: &FitConfig) -> Result<f64> {
    if let Some(a) = cfg.fix_alpha {
        return Ok(a);
    }
    let eta = prob.x * beta;
    let pen = prob.penalty(beta);
    let kappa = params.kappa();
    let objective = |a: f64| match FamilyParams::new(kappa, a) {
        Ok(p) => prob.loglik_at_eta(&p, &eta) - pen,
        Err(_) => f64::NEG_INFINITY,
    };
    Ok(scalar_ascent(params.alpha(), cfg.alpha_bounds, cfg.fd_step, cfg.max_newton_iters, objective))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Safeguarded Newton step on a scalar parameter confined to `[lo, hi]`.
///
/// Derivatives are finite differences of `f` with step `rel_step * max(1, |x|)`
/// (one-sided next to a bound). A Newton move is taken when the curvature is
/// negative and the move increases `f`; otherwise a bracketing plus
/// golden-section search runs along the sign of the score. The returned point
/// never has a lower value than `x0`.
fn scalar_ascent<F: Fn(f64) -> f64>(x0: f64, (lo, hi): (f64, f64), rel_step: f64, max_iters: usize, f: F) -> f64 {
    let h = rel_step * x0.abs().max(1.0);
    let f0 = f(x0);
    if !f0.is_finite() {
        return x0;
    }
    let (score, curvature) = if x0 - h < lo {
        let (f1, f2) = (f(x0 + h), f(x0 + 2.0 * h));
        ((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h), (f0 - 2.0 * f1 + f2) / (h * h))
    } else if x0 + h > hi {
        let (f1, f2) = (f(x0 - h), f(x0 - 2.0 * h));
        ((3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h), (f0 - 2.0 * f1 + f2) / (h * h))
    } else {
        let (fp, fm) = (f(x0 + h), f(x0 - h));
        ((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h))
    };
    if !score.is_finite() || score.abs() < SCORE_TOL {
        return x0;
    }
    if (x0 <= lo && score < 0.0) || (x0 >= hi && score > 0.0) {
        return x0;
    }

    let mut best = (x0, f0);
    let end = if curvature < 0.0 {
        let newton = (x0 - score / curvature).clamp(lo, hi);
        let fn_ = f(newton);
        if fn_ > f0 {
            return newton;
        }
        newton
    } else {
        // expand along the score until the objective stops increasing
        let dir = score.signum();
        let mut span = 0.1 * x0.abs().max(1.0);
        let mut prev = (x0, f0);
        let mut end = x0;
        for _ in 0..max_iters {
            let xn = (x0 + dir * span).clamp(lo, hi);
            let fx = f(xn);
            end = xn;
            if !(fx > prev.1) {
                break;
            }
            prev = (xn, fx);
            if fx > best.1 {
                best = (xn, fx);
            }
            if xn == lo || xn == hi {
                break;
            }
            span *= 2.0;
        }
        end
    };

    let (mut a, mut b) = (x0, end);
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..max_iters {
        for (x, v) in [(c, fc), (d, fd)] {
            if v > best.1 {
                best = (x, v);
            }
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    if best.1 > f0 {
        best.0
    } else {
        x0
    }
}

/// Fits the model; see [`fit_traced`].
pub fn fit(x: &DMatrix<f64>, y: &[u8], cfg: &FitConfig) -> Result<FittedModel> {
    fit_traced(x, y, cfg).map(|(m, _)| m)
}

/// Fits the model and returns the objective after initialization and after
/// every outer cycle.
///
/// Non-convergence is reported through [`FittedModel::converged`]; only
/// invalid input is an error.
pub fn fit_traced(x: &DMatrix<f64>, y: &[u8], cfg: &FitConfig) -> Result<(FittedModel, Vec<f64>)> {
    let init = initialize(x, y, cfg)?;
    let prob = Problem::new(x, y, cfg.lambda)?;
    let mut params = init.params;
    let mut beta = init.beta;
    let mut value = prob.objective(&params, &beta);
    let mut trace = vec![value];
    let mut converged = false;
    let mut iters = 0;

    for t in 1..=cfg.max_outer_iters {
        iters = t;
        let kappa = kappa_update(&prob, &params, &beta, cfg)?;
        params = FamilyParams::new(kappa, params.alpha())?;
        let alpha = alpha_update(&prob, &params, &beta, cfg)?;
        params = FamilyParams::new(params.kappa(), alpha)?;
        let next = match prob.beta_step(&params, &beta, cfg.weight_mode) {
            Ok((b, v)) => {
                beta = b;
                v
            }
            Err(Error::Singular) => {
                trace.push(prob.objective(&params, &beta));
                break;
            }
            Err(e) => return Err(e),
        };
        trace.push(next);
        let done = (next - value).abs() <= cfg.epsilon * value.abs();
        value = next;
        if done {
            converged = true;
            break;
        }
    }

    let f = x.ncols() - 1;
    let model = FittedModel {
        params,
        beta0: beta[0],
        beta: beta.rows(1, f).iter().copied().collect(),
        lambda: cfg.lambda,
        penalized_loglik: *trace.last().expect("trace is never empty"),
        n_iters: iters,
        converged,
        standardization: Standardization::identity(f),
    };
    Ok((model, trace))
}

/// Fits on a dataset, standardizing features first when asked to. The
/// transform is recorded in the model so predictions take raw features.
pub fn fit_dataset(d: &Dataset, cfg: &FitConfig, standardize: bool) -> Result<FittedModel> {
    fit_dataset_traced(d, cfg, standardize).map(|(m, _)| m)
}

pub fn fit_dataset_traced(d: &Dataset, cfg: &FitConfig, standardize: bool) -> Result<(FittedModel, Vec<f64>)> {
    if standardize {
        let s = data::standardize(d)?;
        let (mut model, trace) = fit_traced(&data::design_matrix(&s.data), &s.data.labels, cfg)?;
        model.standardization = s.transform;
        Ok((model, trace))
    } else {
        fit_traced(&data::design_matrix(d), &d.labels, cfg)
    }
}
