//! Prediction, classification and per-point diagnostics.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::solver::FittedModel;

/// Linear predictor `beta0 + z' beta` for raw feature rows, where `z` is the
/// row after the model's standardization.
pub fn linear_predictor(model: &FittedModel, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x.ncols() != model.n_features() {
        return Err(Error::Shape(format!("model expects {} features, got {}", model.n_features(), x.ncols())));
    }
    let t = &model.standardization;
    Ok(x.row_iter()
        .map(|row| {
            row.iter().enumerate().fold(model.beta0, |acc, (j, v)| acc + (v - t.means[j]) / t.scales[j] * model.beta[j])
        })
        .collect())
}

/// Fitted means `b'(f(eta))` for raw feature rows.
pub fn predict_mu(model: &FittedModel, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    let p = model.params;
    Ok(linear_predictor(model, x)?.into_iter().map(|e| p.composite_mean(e)).collect())
}

/// Consensus rule `I(mu > 0.5)`; exactly 0.5 goes to label 0.
pub fn classify(mu: &[f64]) -> Vec<u8> {
    mu.iter().map(|&m| u8::from(m > 0.5)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticThresholds {
    /// Points with `V(mu) >= v_threshold` are soft support vectors.
    pub v_threshold: f64,
    /// Remaining points with `|mu - 1/2| < mu_band` are in the dead zone.
    pub mu_band: f64,
}

impl Default for DiagnosticThresholds {
    fn default() -> Self {
        Self { v_threshold: 1.0, mu_band: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointType {
    SoftSupportVector,
    DeadZone,
    Inlier,
}

impl PointType {
    pub fn classify(mu: f64, variance_weight: f64, th: &DiagnosticThresholds) -> Self {
        if variance_weight >= th.v_threshold {
            PointType::SoftSupportVector
        } else if (mu - 0.5).abs() < th.mu_band {
            PointType::DeadZone
        } else {
            PointType::Inlier
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PointType::SoftSupportVector => "sv",
            PointType::DeadZone => "dead",
            PointType::Inlier => "inlier",
        }
    }
}

impl std::fmt::Display for PointType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDiagnostics {
    pub mu_hat: f64,
    /// `V(mu_hat)`, evaluated as `b''` at the fitted canonical parameter.
    pub variance_weight: f64,
    pub point_type: PointType,
    pub predicted_label: u8,
}

pub fn diagnose(model: &FittedModel, x: &DMatrix<f64>, th: &DiagnosticThresholds) -> Result<Vec<PointDiagnostics>> {
    let p = model.params;
    Ok(linear_predictor(model, x)?
        .into_iter()
        .map(|eta| {
            let theta = p.theta_from_eta(eta);
            let mu_hat = p.mean(theta);
            let variance_weight = p.variance_at_theta(theta);
            PointDiagnostics {
                mu_hat,
                variance_weight,
                point_type: PointType::classify(mu_hat, variance_weight, th),
                predicted_label: u8::from(mu_hat > 0.5),
            }
        })
        .collect())
}

/// Soft margin `M = (alpha / kappa) / |beta|`, on the fitting scale.
pub fn soft_margin(model: &FittedModel) -> Result<f64> {
    let norm = model.coef_norm();
    if !(norm > 0.0) {
        return Err(Error::Domain("soft margin is undefined for a zero coefficient vector".into()));
    }
    Ok(model.params.delta() / norm)
}

/// Writes `mu,yhat,variance_weight,point_type` rows.
pub fn write_predictions<W: Write>(writer: W, diags: &[PointDiagnostics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["mu", "yhat", "variance_weight", "point_type"])?;
    for d in diags {
        w.write_record([
            format!("{:.16e}", d.mu_hat),
            d.predicted_label.to_string(),
            format!("{:.16e}", d.variance_weight),
            d.point_type.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
