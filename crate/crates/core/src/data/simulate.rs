//! Two-class Gaussian mixture with boundary `x2 = x1 + 1`.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` and normal variates
//! from `rand_distr::StandardNormal` (ziggurat). Label-0 rows are drawn first,
//! then label-1 rows; within a row `x1` is drawn before `x2`.

use std::f64::consts::SQRT_2;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::error::{Error, Result};

/// Mean of the label-0 class.
pub const CLASS0_MEAN: [f64; 2] = [SQRT_2, 1.0];
/// Mean of the label-1 class.
pub const CLASS1_MEAN: [f64; 2] = [0.0, 1.0 + SQRT_2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSpec {
    pub n: usize,
    /// Imbalance: fraction of label-0 rows, in `(0, 0.5]`.
    pub rho: f64,
    /// Per-coordinate standard deviation.
    pub sigma: f64,
    pub seed: u64,
}

impl SimSpec {
    /// Size of the label-0 class, `floor(rho * n)`.
    ///
    /// A 1e-9 slack absorbs representation error in decimal `rho`
    /// (`0.29 * 100` is `28.999999999999996` in binary).
    pub fn n_class0(&self) -> usize {
        (self.rho * self.n as f64 + 1e-9).floor() as usize
    }

    pub fn n_class1(&self) -> usize {
        self.n - self.n_class0()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 0.5) {
            return Err(Error::Config(format!("rho must lie in (0, 0.5], got {}", self.rho)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.n_class0() == 0 {
            return Err(Error::Config(format!("floor(rho * n) = 0 for rho = {} and n = {}", self.rho, self.n)));
        }
        Ok(())
    }
}

pub fn simulate_mixture(spec: &SimSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n0 = spec.n_class0();
    let mut features = DMatrix::zeros(spec.n, 2);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let (center, label) = if i < n0 { (CLASS0_MEAN, 0) } else { (CLASS1_MEAN, 1) };
        for (j, c) in center.iter().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            features[(i, j)] = c + spec.sigma * z;
        }
        labels.push(label);
    }
    Dataset::new(vec!["x1".into(), "x2".into()], features, labels)
}
