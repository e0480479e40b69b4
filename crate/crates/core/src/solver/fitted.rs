//! The fitted model and its JSON document.
//!
//! Layout, in this order:
//!
//! ```json
//! {
//!   "family": {"kappa": .., "alpha": ..},
//!   "coefficients": {"intercept": .., "values": [..]},
//!   "lambda": ..,
//!   "fit": {"loglik": .., "iters": .., "converged": ..},
//!   "standardization": {"means": [..], "scales": [..]}
//! }
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips `f64`
//! exactly.

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::ser::{Error as _, SerializeSeq};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::data::Standardization;
use crate::error::{Error, Result};
use crate::family::FamilyParams;

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    /// Estimated softness and scaled separation.
    pub params: FamilyParams,
    /// Unpenalized intercept.
    pub beta0: f64,
    /// Feature coefficients on the (possibly standardized) fitting scale.
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub penalized_loglik: f64,
    pub n_iters: usize,
    pub converged: bool,
    pub standardization: Standardization,
}

impl FittedModel {
    pub fn kappa_hat(&self) -> f64 {
        self.params.kappa()
    }

    pub fn alpha_hat(&self) -> f64 {
        self.params.alpha()
    }

    pub fn n_features(&self) -> usize {
        self.beta.len()
    }

    /// Intercept followed by feature coefficients.
    pub fn coefficients(&self) -> DVector<f64> {
        DVector::from_iterator(self.beta.len() + 1, std::iter::once(self.beta0).chain(self.beta.iter().copied()))
    }

    /// Euclidean norm of the feature coefficients (intercept excluded).
    pub fn coef_norm(&self) -> f64 {
        self.beta.iter().map(|b| b * b).sum::<f64>().sqrt()
    }

    /// Coefficients expressed on the raw feature scale.
    pub fn raw_coefficients(&self) -> (f64, Vec<f64>) {
        self.standardization.coefficients_to_raw(self.beta0, &self.beta)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDoc {
            family: FamilyDoc { kappa: self.params.kappa(), alpha: self.params.alpha() },
            coefficients: CoefDoc { intercept: self.beta0, values: self.beta.clone() },
            lambda: self.lambda,
            fit: FitDoc { loglik: self.penalized_loglik, iters: self.n_iters, converged: self.converged },
            standardization: StdDoc {
                means: self.standardization.means.clone(),
                scales: self.standardization.scales.clone(),
            },
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        let params = FamilyParams::new(doc.family.kappa, doc.family.alpha)?;
        let f = doc.coefficients.values.len();
        if doc.standardization.means.len() != f || doc.standardization.scales.len() != f {
            return Err(Error::Data(format!(
                "model has {f} coefficients but standardization covers {} / {} features",
                doc.standardization.means.len(),
                doc.standardization.scales.len()
            )));
        }
        if doc.standardization.scales.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Data("standardization scales must be positive".into()));
        }
        Ok(Self {
            params,
            beta0: doc.coefficients.intercept,
            beta: doc.coefficients.values,
            lambda: doc.lambda,
            penalized_loglik: doc.fit.loglik,
            n_iters: doc.fit.iters,
            converged: doc.fit.converged,
            standardization: Standardization { means: doc.standardization.means, scales: doc.standardization.scales },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn format_sig17(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

fn sig17<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    let text = format_sig17(*v).ok_or_else(|| S::Error::custom(format!("cannot serialize non-finite {v}")))?;
    RawValue::from_string(text).map_err(S::Error::custom)?.serialize(s)
}

fn sig17_seq<S: Serializer>(vs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(vs.len()))?;
    for v in vs {
        let text = format_sig17(*v).ok_or_else(|| S::Error::custom(format!("cannot serialize non-finite {v}")))?;
        seq.serialize_element(&RawValue::from_string(text).map_err(S::Error::custom)?)?;
    }
    seq.end()
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    family: FamilyDoc,
    coefficients: CoefDoc,
    #[serde(serialize_with = "sig17")]
    lambda: f64,
    fit: FitDoc,
    standardization: StdDoc,
}

#[derive(Serialize, Deserialize)]
struct FamilyDoc {
    #[serde(serialize_with = "sig17")]
    kappa: f64,
    #[serde(serialize_with = "sig17")]
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct CoefDoc {
    #[serde(serialize_with = "sig17")]
    intercept: f64,
    #[serde(serialize_with = "sig17_seq")]
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FitDoc {
    #[serde(serialize_with = "sig17")]
    loglik: f64,
    iters: usize,
    converged: bool,
}

#[derive(Serialize, Deserialize)]
struct StdDoc {
    #[serde(serialize_with = "sig17_seq")]
    means: Vec<f64>,
    #[serde(serialize_with = "sig17_seq")]
    scales: Vec<f64>,
}
