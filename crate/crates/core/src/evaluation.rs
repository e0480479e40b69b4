//! Classification metrics and cross-validated selection of the penalty.

use std::io::Write;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{classify, predict_mu};
use crate::solver::{fit_dataset, FitConfig, FittedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn from_labels(truth: &[u8], predicted: &[u8]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Shape(format!("{} labels but {} predictions", truth.len(), predicted.len())));
        }
        let mut cm = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (1, 1) => cm.tp += 1,
                (0, 1) => cm.fp += 1,
                (0, 0) => cm.tn += 1,
                (1, 0) => cm.fn_ += 1,
                _ => return Err(Error::Data(format!("non-binary label pair ({t}, {p})"))),
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

/// Matthews correlation coefficient; 0 when any marginal count is zero.
pub fn mcc(cm: &ConfusionMatrix) -> f64 {
    let (tp, fp, tn, fn_) = (cm.tp as f64, cm.fp as f64, cm.tn as f64, cm.fn_ as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return 0.0;
    }
    let denom = (factors[0] * factors[1] * (factors[2] * factors[3])).sqrt();
    ((tp * tn - fp * fn_) / denom).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub mcc: f64,
    pub accuracy: f64,
}

pub fn evaluate(model: &FittedModel, x: &DMatrix<f64>, y: &[u8]) -> Result<Evaluation> {
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.nrows(), y.len())));
    }
    let predicted = classify(&predict_mu(model, x)?);
    let confusion = ConfusionMatrix::from_labels(y, &predicted)?;
    Ok(Evaluation { confusion, mcc: mcc(&confusion), accuracy: confusion.accuracy() })
}

/// Seeded permutation of `0..n` cut into `k` folds; the first `n % k` folds
/// get one extra index.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::Config(format!("need 2 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub lambda_grid: Vec<f64>,
    /// Held-out MCC indexed `[lambda][rep][fold]`; `None` marks a cell whose
    /// training set had a single class or whose fit failed.
    pub metrics: Vec<Vec<Vec<Option<f64>>>>,
    /// Mean over the available cells of each lambda.
    pub means: Vec<Option<f64>>,
    pub selected_lambda: f64,
    pub seed: u64,
}

impl CvReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Flat `lambda,rep,fold,mcc` rows; missing cells are written as `NA`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lambda", "rep", "fold", "mcc"])?;
        for (lambda, reps) in self.lambda_grid.iter().zip(&self.metrics) {
            for (r, folds) in reps.iter().enumerate() {
                for (f, cell) in folds.iter().enumerate() {
                    let m = cell.map_or_else(|| "NA".to_string(), |v| v.to_string());
                    w.write_record([lambda.to_string(), r.to_string(), f.to_string(), m])?;
                }
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CvOptions {
    pub folds: usize,
    pub reps: usize,
    pub seed: u64,
    pub standardize: bool,
    pub parallel: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self { folds: 10, reps: 20, seed: 0, standardize: true, parallel: true }
    }
}

/// K-fold cross-validation of held-out MCC over a penalty grid.
///
/// Replication `r` splits with seed `seed + r`. The selected penalty has the
/// largest mean MCC; ties go to the smallest penalty.
pub fn cross_validate(d: &Dataset, base: &FitConfig, grid: &[f64], opts: &CvOptions) -> Result<CvReport> {
    if grid.is_empty() {
        return Err(Error::Config("lambda grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) || grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::Config("lambda grid must be finite, non-negative and ascending".into()));
    }
    if opts.reps == 0 {
        return Err(Error::Config("need at least one replication".into()));
    }
    if !(d.labels.contains(&0) && d.labels.contains(&1)) {
        return Err(Error::Data("cross-validation needs both classes".into()));
    }
    base.validate()?;

    let splits = (0..opts.reps)
        .map(|r| kfold_split(d.n(), opts.folds, opts.seed.wrapping_add(r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> = (0..opts.reps).flat_map(|r| (0..opts.folds).map(move |f| (r, f))).collect();

    let run = |&(r, f): &(usize, usize)| -> Vec<Option<f64>> {
        let test = &splits[r][f];
        let mut held = vec![false; d.n()];
        for &i in test {
            held[i] = true;
        }
        let train: Vec<usize> = (0..d.n()).filter(|&i| !held[i]).collect();
        let train = d.subset(&train);
        let test = d.subset(test);
        if !(train.labels.contains(&0) && train.labels.contains(&1)) {
            return vec![None; grid.len()];
        }
        grid.iter()
            .map(|&lambda| {
                let cfg = base.clone().with_lambda(lambda);
                let model = fit_dataset(&train, &cfg, opts.standardize).ok()?;
                evaluate(&model, &test.features, &test.labels).ok().map(|e| e.mcc)
            })
            .collect()
    };
    let results: Vec<Vec<Option<f64>>> =
        if opts.parallel { cells.par_iter().map(run).collect() } else { cells.iter().map(run).collect() };

    let mut metrics = vec![vec![vec![None; opts.folds]; opts.reps]; grid.len()];
    for (&(r, f), row) in cells.iter().zip(&results) {
        for (l, v) in row.iter().enumerate() {
            metrics[l][r][f] = *v;
        }
    }
    let means: Vec<Option<f64>> = metrics
        .iter()
        .map(|reps| {
            let vals: Vec<f64> = reps.iter().flatten().flatten().copied().collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (l, m) in means.iter().enumerate() {
        if let Some(m) = *m {
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((l, m));
            }
        }
    }
    let (sel, _) = best.ok_or_else(|| Error::Data("every cross-validation cell is missing".into()))?;
    Ok(CvReport { lambda_grid: grid.to_vec(), metrics, means, selected_lambda: grid[sel], seed: opts.seed })
}
