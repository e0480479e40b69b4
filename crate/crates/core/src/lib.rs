//! Soft-SVM regression.
//!
//! A generalized linear model over a two-parameter exponential family whose
//! cumulant is a smoothed version of the SVM hinge cumulant. Softness `kappa`
//! and scaled separation `alpha` are estimated together with the regression
//! coefficients; `(kappa, alpha) = (1, 0)` is ordinary logistic regression.
//!
//! Modules, bottom-up:
//!
//! * [`numerics`]: overflow-free scalar primitives (`log1pe`, `log_cosh`, ...).
//! * [`family`]: cumulant, mean, variance, canonical map, link.
//! * [`solver`]: penalized cyclic scoring fit producing a [`FittedModel`].
//! * [`model`]: prediction, classification and per-point diagnostics.
//! * [`evaluation`]: MCC, k-fold splits, cross-validated penalty selection.
//! * [`data`]: CSV ingestion, standardization, simulation, factorial study.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod evaluation;
pub mod family;
pub mod model;
pub mod numerics;
pub mod solver;

pub use error::{Error, Result};
pub use family::FamilyParams;
pub use solver::{FitConfig, FittedModel};
