//! Datasets, CSV ingestion, standardization and design matrices.

mod factorial;
mod simulate;

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use factorial::{cell_seed, run_factorial, write_factorial_csv, FactorialConfig, FactorialRow, Method};
pub use simulate::{simulate_mixture, SimSpec, CLASS0_MEAN, CLASS1_MEAN};

/// Labeled observations: an `n x f` feature block and binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub features: DMatrix<f64>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, features: DMatrix<f64>, labels: Vec<u8>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Shape(format!("{} feature rows but {} labels", features.nrows(), labels.len())));
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::Shape(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                features.ncols()
            )));
        }
        if labels.is_empty() {
            return Err(Error::Data("dataset has no rows".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Data(format!("label {bad} is not binary")));
        }
        Ok(Self { feature_names, features, labels })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Rows selected by `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Writes the features followed by a `label_name` column.
    pub fn write_csv<W: Write>(&self, writer: W, label_name: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.feature_names.clone();
        header.push(label_name.to_string());
        w.write_record(&header)?;
        for i in 0..self.n() {
            let mut record: Vec<String> = self.features.row(i).iter().map(|v| v.to_string()).collect();
            record.push(self.labels[i].to_string());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// How the raw label column maps onto `{0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelRule {
    /// Labels already coded as `0`/`1`.
    Binary,
    /// Exactly this string is the positive class.
    Equals(String),
    /// Numeric labels at or above the threshold are positive (dichotomization
    /// of ordinal scores such as wine quality).
    AtLeast(f64),
}

impl LabelRule {
    fn apply(&self, raw: &str) -> std::result::Result<u8, String> {
        let raw = raw.trim();
        match self {
            LabelRule::Binary => match raw.parse::<f64>() {
                Ok(0.0) => Ok(0),
                Ok(1.0) => Ok(1),
                _ => Err(format!("label {raw:?} is not 0 or 1")),
            },
            LabelRule::Equals(pos) => Ok(u8::from(raw == pos)),
            LabelRule::AtLeast(t) => {
                raw.parse::<f64>().map(|v| u8::from(v >= *t)).map_err(|_| format!("label {raw:?} is not numeric"))
            }
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Loads a headed CSV file; every column except `label_column` is a feature.
pub fn load_csv(path: impl AsRef<Path>, label_column: &str, rule: &LabelRule) -> Result<Dataset> {
    read_csv(open(path.as_ref())?, label_column, rule)
}

pub fn read_csv<R: Read>(reader: R, label_column: &str, rule: &LabelRule) -> Result<Dataset> {
    let table = read_table(reader)?;
    let label_idx = table
        .header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Data(format!("label column {label_column:?} not found")))?;
    let feature_cols: Vec<usize> = (0..table.header.len()).filter(|&c| c != label_idx).collect();
    let features = table.numeric_block(&feature_cols)?;
    let labels = table
        .rows
        .iter()
        .map(|(line, rec)| rule.apply(&rec[label_idx]).map_err(|msg| Error::Data(format!("line {line}: {msg}"))))
        .collect::<Result<Vec<_>>>()?;
    let names = feature_cols.iter().map(|&c| table.header[c].clone()).collect();
    Dataset::new(names, features, labels)
}

/// Loads feature columns only, skipping `exclude` if it is present.
pub fn load_features(path: impl AsRef<Path>, exclude: Option<&str>) -> Result<(Vec<String>, DMatrix<f64>)> {
    read_features(open(path.as_ref())?, exclude)
}

pub fn read_features<R: Read>(reader: R, exclude: Option<&str>) -> Result<(Vec<String>, DMatrix<f64>)> {
    let table = read_table(reader)?;
    let cols: Vec<usize> = (0..table.header.len()).filter(|&c| Some(table.header[c].as_str()) != exclude).collect();
    let features = table.numeric_block(&cols)?;
    Ok((cols.iter().map(|&c| table.header[c].clone()).collect(), features))
}

struct Table {
    header: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn numeric_block(&self, cols: &[usize]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.rows.len(), cols.len());
        for (i, (line, rec)) in self.rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                let cell = rec[c].trim();
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Data(format!("line {line}, column {:?}: {cell:?} is not a number", self.header[c]))
                })?;
                if !v.is_finite() {
                    return Err(Error::Data(format!("line {line}, column {:?}: non-finite value", self.header[c])));
                }
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }
}

fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, rec));
    }
    if rows.is_empty() {
        return Err(Error::Data("CSV contains no data rows".into()));
    }
    Ok(Table { header, rows })
}

/// Per-feature affine transform `z = (x - mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardization {
    pub fn identity(n_features: usize) -> Self {
        Self { means: vec![0.0; n_features], scales: vec![1.0; n_features] }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn apply(&self, features: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = features.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col.apply(|v| *v = (*v - self.means[j]) / self.scales[j]);
        }
        out
    }

    pub fn invert(&self, standardized: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = standardized.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col.apply(|v| *v = *v * self.scales[j] + self.means[j]);
        }
        out
    }

    /// Maps coefficients fitted on standardized features back to raw units.
    pub fn coefficients_to_raw(&self, intercept: f64, beta: &[f64]) -> (f64, Vec<f64>) {
        let raw: Vec<f64> = beta.iter().zip(&self.scales).map(|(b, s)| b / s).collect();
        let shift: f64 = raw.iter().zip(&self.means).map(|(b, m)| b * m).sum();
        (intercept - shift, raw)
    }
}

/// Output of [`standardize`].
#[derive(Debug, Clone)]
pub struct Standardized {
    pub data: Dataset,
    pub transform: Standardization,
    /// Features with zero sample variance; these are centered and left unscaled.
    pub constant: Vec<bool>,
}

/// Centers each feature and scales it to unit sample standard deviation.
pub fn standardize(d: &Dataset) -> Result<Standardized> {
    let n = d.n();
    if n < 2 {
        return Err(Error::Data("standardization needs at least two rows".into()));
    }
    let f = d.n_features();
    let mut means = Vec::with_capacity(f);
    let mut scales = Vec::with_capacity(f);
    let mut constant = Vec::with_capacity(f);
    for col in d.features.column_iter() {
        let mean = col.sum() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        let is_const = !(sd > 0.0);
        means.push(mean);
        scales.push(if is_const { 1.0 } else { sd });
        constant.push(is_const);
    }
    let transform = Standardization { means, scales };
    let data = Dataset {
        feature_names: d.feature_names.clone(),
        features: transform.apply(&d.features),
        labels: d.labels.clone(),
    };
    Ok(Standardized { data, transform, constant })
}

/// `n x (f + 1)` matrix whose first column is the intercept.
pub fn design_matrix(d: &Dataset) -> DMatrix<f64> {
    design_from_features(&d.features)
}

pub fn design_from_features(features: &DMatrix<f64>) -> DMatrix<f64> {
    features.clone().insert_column(0, 1.0)
}
