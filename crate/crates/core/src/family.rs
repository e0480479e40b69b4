//! The Soft-SVM exponential family.
//!
//! The family is indexed by a softness `kappa > 0` and a scaled separation
//! `alpha = kappa * delta >= 0`. With `(kappa, alpha) = (1, 0)` every function
//! here collapses onto its Bernoulli/logistic counterpart; as `kappa -> inf`
//! with `delta -> 1` the cumulant approaches the (non-smooth) SVM cumulant
//! [`hinge_cumulant`].
//!
//! Arguments of the soft-plus terms are always formed as `kappa * x ± alpha`
//! so that `delta` is never materialized on the hot path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{asinh_exp, bernoulli_var, expit, log1pe, log_cosh, log_sinh, logit};

/// Means are clamped into `[MU_EPS, 1 - MU_EPS]` before inversion.
pub const MU_EPS: f64 = 1e-12;

/// Softness and scaled separation of a Soft-SVM family member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct FamilyParams {
    kappa: f64,
    alpha: f64,
}

#[derive(Deserialize)]
struct RawParams {
    kappa: f64,
    alpha: f64,
}

impl TryFrom<RawParams> for FamilyParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        FamilyParams::new(raw.kappa, raw.alpha)
    }
}

impl FamilyParams {
    pub fn new(kappa: f64, alpha: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("kappa must be positive and finite, got {kappa}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be non-negative and finite, got {alpha}")));
        }
        Ok(Self { kappa, alpha })
    }

    /// Parameterize by separation `delta` instead of `alpha = kappa * delta`.
    pub fn from_delta(kappa: f64, delta: f64) -> Result<Self> {
        Self::new(kappa, kappa * delta)
    }

    /// The Bernoulli/logistic member `(kappa, alpha) = (1, 0)`.
    pub fn logistic() -> Self {
        Self { kappa: 1.0, alpha: 0.0 }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.alpha / self.kappa
    }

    /// Cumulant `b(theta) = [p(theta + 2 delta) + p(theta - 2 delta)] / 2`.
    pub fn cumulant(&self, theta: f64) -> f64 {
        let kt = self.kappa * theta;
        0.5 * (log1pe(kt + 2.0 * self.alpha) + log1pe(kt - 2.0 * self.alpha)) / self.kappa
    }

    /// Mean `b'(theta)`.
    ///
    /// Evaluated on the lower half and reflected, so `mean(-t) = 1 - mean(t)`
    /// holds to one rounding and `mean(0)` is exactly one half.
    pub fn mean(&self, theta: f64) -> f64 {
        let kt = self.kappa * theta;
        let lower = |x: f64| 0.5 * (expit(x + 2.0 * self.alpha) + expit(x - 2.0 * self.alpha));
        if kt == 0.0 {
            0.5
        } else if kt < 0.0 {
            lower(kt)
        } else {
            1.0 - lower(-kt)
        }
    }

    /// Variance `b''(theta)` at the canonical parameter.
    pub fn variance_at_theta(&self, theta: f64) -> f64 {
        let kt = self.kappa * theta;
        0.5 * self.kappa * (bernoulli_var(kt + 2.0 * self.alpha) + bernoulli_var(kt - 2.0 * self.alpha))
    }

    /// Canonical map `f(eta) = p(eta + delta) - p(delta - eta)`.
    pub fn theta_from_eta(&self, eta: f64) -> f64 {
        let ke = self.kappa * eta;
        (log1pe(ke + self.alpha) - log1pe(self.alpha - ke)) / self.kappa
    }

    /// `f'(eta)`, always in `[1, 2)`.
    pub fn f_prime(&self, eta: f64) -> f64 {
        let ke = self.kappa * eta;
        expit(ke + self.alpha) + expit(self.alpha - ke)
    }

    /// `f''(eta)`, an odd function of `eta`.
    pub fn f_second(&self, eta: f64) -> f64 {
        let ke = self.kappa * eta;
        self.kappa * (bernoulli_var(ke + self.alpha) - bernoulli_var(self.alpha - ke))
    }

    /// Inverse of the mean function, `[b']^{-1}(mu)`.
    pub fn inverse_mean(&self, mu: f64) -> Result<f64> {
        Ok(u_alpha(self.alpha, mu)? / self.kappa)
    }

    /// Inverse of the canonical map, `f^{-1}(theta)`.
    pub fn eta_from_theta(&self, theta: f64) -> f64 {
        if theta == 0.0 {
            return 0.0;
        }
        let half = 0.5 * self.kappa * theta.abs();
        if half == 0.0 {
            // theta is subnormal; f is linear here with slope f'(0)
            return theta / (2.0 * expit(self.alpha));
        }
        let h = -self.alpha + log_sinh(half).expect("argument is non-zero");
        0.5 * theta + theta.signum() * asinh_exp(h) / self.kappa
    }

    /// Link `g = f^{-1} o [b']^{-1}`, mapping a mean to the linear predictor.
    pub fn link(&self, mu: f64) -> Result<f64> {
        Ok(self.eta_from_theta(self.inverse_mean(mu)?))
    }

    /// Mean as a function of the linear predictor, `b'(f(eta))`.
    pub fn composite_mean(&self, eta: f64) -> f64 {
        self.mean(self.theta_from_eta(eta))
    }

    /// Variance function `V(mu) = b''([b']^{-1}(mu))`.
    pub fn variance_of_mean(&self, mu: f64) -> Result<f64> {
        Ok(self.variance_at_theta(self.inverse_mean(mu)?))
    }
}

/// Coupling `delta(kappa) = 1 - 1/kappa` used to draw families that slide from
/// logistic (`kappa = 1`) toward SVM as `kappa` grows.
pub fn delta_of_kappa(kappa: f64) -> f64 {
    1.0 - 1.0 / kappa
}

fn clamp_mu(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Domain(format!("mean must lie in (0, 1), got {mu}")));
    }
    Ok(mu.clamp(MU_EPS, 1.0 - MU_EPS))
}

/// `u_alpha(mu) = kappa [b']^{-1}(mu)`, which depends on `alpha` only.
pub fn u_alpha(alpha: f64, mu: f64) -> Result<f64> {
    let mu = clamp_mu(mu)?;
    if mu == 0.5 {
        return Ok(0.0);
    }
    let centered = mu - 0.5;
    let h = log_cosh(2.0 * alpha) + centered.abs().ln() - 0.5 * (mu.ln() + (-mu).ln_1p());
    Ok(0.5 * logit(mu) + centered.signum() * asinh_exp(h))
}

/// Shape factor `r_alpha(mu)` with `V(mu) = kappa * r_alpha(mu)`.
pub fn shape_r(alpha: f64, mu: f64) -> Result<f64> {
    let u = u_alpha(alpha, mu)?;
    Ok(0.5 * (bernoulli_var(u + 2.0 * alpha) + bernoulli_var(u - 2.0 * alpha)))
}

/// `sum_i y_i theta_i - b(theta_i)`.
pub fn log_likelihood(params: &FamilyParams, thetas: &[f64], y: &[f64]) -> Result<f64> {
    if thetas.len() != y.len() {
        return Err(Error::Shape(format!("{} canonical parameters but {} labels", thetas.len(), y.len())));
    }
    Ok(thetas.iter().zip(y).map(|(&t, &yi)| yi * t - params.cumulant(t)).sum())
}

/// SVM cumulant `s(theta) = [(theta + 2)_+ + (theta - 2)_+] / 2`.
pub fn hinge_cumulant(theta: f64) -> f64 {
    0.5 * ((theta + 2.0).max(0.0) + (theta - 2.0).max(0.0))
}
