//! Diabetes regression table: loading, seeded train/validation split and
//! min-max scaling fitted on the training rows only.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 11] = ["AGE", "SEX", "BMI", "BP", "S1", "S2", "S3", "S4", "S5", "S6", "Y"];
const TARGET_COLUMN: usize = 10;

/// Map a feature name (column header or the usual lowercase alias) to its
/// column index.
pub fn feature_column(name: &str) -> Option<usize> {
    let upper = name.to_ascii_uppercase();
    let column = match upper.as_str() {
        "TC" => "S1",
        "LDL" => "S2",
        "HDL" => "S3",
        "TCH" => "S4",
        "LTG" => "S5",
        "GLU" => "S6",
        other => other,
    };
    COLUMNS[..TARGET_COLUMN].iter().position(|c| *c == column)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawDataset {
    /// Each row holds the ten baseline variables followed by the target.
    pub rows: Vec<[f64; 11]>,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[index])
    }
}

pub fn load_diabetes(path: impl AsRef<Path>) -> Result<RawDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_diabetes(&text, path)
}

/// Parse tab- or comma-separated text with an `AGE … Y` header.
/// `origin` is only used in error messages.
pub fn parse_diabetes(text: &str, origin: &Path) -> Result<RawDataset> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let sep = if header.contains('\t') { '\t' } else { ',' };
    let names: Vec<String> = header.split(sep).map(|h| h.trim().to_ascii_uppercase()).collect();
    if names != COLUMNS {
        return Err(parse_err(
            1,
            format!("unexpected header {names:?}, expected {}", COLUMNS.join(",")),
        ));
    }

    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let cells: Vec<&str> = line.split(sep).map(str::trim).collect();
        if cells.len() != COLUMNS.len() {
            return Err(parse_err(
                line_no,
                format!("expected {} columns, found {}", COLUMNS.len(), cells.len()),
            ));
        }
        let mut row = [0.0; 11];
        for (k, cell) in cells.iter().enumerate() {
            row[k] = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line_no, format!("column {}: cannot parse '{cell}' as a number", COLUMNS[k])))?;
        }
        rows.push(row);
    }
    Ok(RawDataset { rows })
}

/// Affine map of `[min, max]` onto `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
    pub lo: f64,
    pub hi: f64,
}

impl MinMax {
    pub fn fit(values: impl IntoIterator<Item = f64>, lo: f64, hi: f64) -> Result<Self> {
        let (min, max) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !(min < max) {
            return Err(Error::invalid(format!(
                "cannot scale a column with min {min} and max {max}"
            )));
        }
        Ok(Self { min, max, lo, hi })
    }

    /// Endpoints map exactly: `min → lo`, `max → hi`.
    pub fn transform(&self, x: f64) -> f64 {
        self.lo + (x - self.min) / (self.max - self.min) * (self.hi - self.lo)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub features: [MinMax; 2],
    pub target: MinMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: [f64; 2],
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepareOptions {
    pub seed: u64,
    pub n_train: usize,
    pub n_val: usize,
    pub features: [String; 2],
}

impl PrepareOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

impl Default for PrepareOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            n_train: 40,
            n_val: 400,
            features: ["bmi".into(), "ltg".into()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub scaler: Option<ScalerParams>,
    pub split_seed: u64,
    pub feature_names: [String; 2],
    pub indices_train: Vec<usize>,
    pub indices_val: Vec<usize>,
}

impl PreparedDataset {
    /// Wrap already-scaled samples, e.g. synthetic data in tests.
    pub fn from_samples(train: Vec<Sample>, validation: Vec<Sample>) -> Self {
        Self {
            indices_train: (0..train.len()).collect(),
            indices_val: (train.len()..train.len() + validation.len()).collect(),
            train,
            validation,
            scaler: None,
            split_seed: 0,
            feature_names: ["x0".into(), "x1".into()],
        }
    }

    /// Audit export: split indices, scaler parameters and split seed.
    pub fn split_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Export<'a> {
            split_seed: u64,
            features: &'a [String; 2],
            indices_train: &'a [usize],
            indices_val: &'a [usize],
            scaler: &'a Option<ScalerParams>,
        }
        Ok(serde_json::to_string_pretty(&Export {
            split_seed: self.split_seed,
            features: &self.feature_names,
            indices_train: &self.indices_train,
            indices_val: &self.indices_val,
            scaler: &self.scaler,
        })?)
    }
}

/// Seeded split into `n_train` + `n_val` rows sampled without replacement,
/// then min-max scaling fitted on the training rows: features to [−π, π],
/// target to [−1, 1]. Validation values are not clipped.
pub fn prepare(raw: &RawDataset, options: &PrepareOptions) -> Result<PreparedDataset> {
    let PrepareOptions {
        seed,
        n_train,
        n_val,
        ref features,
    } = *options;
    if n_train == 0 || n_val == 0 {
        return Err(Error::invalid("n_train and n_val must be positive"));
    }
    if n_train + n_val > raw.len() {
        return Err(Error::invalid(format!(
            "need {} rows for the split, dataset has {}",
            n_train + n_val,
            raw.len()
        )));
    }
    let cols = [
        feature_column(&features[0]).ok_or_else(|| Error::invalid(format!("unknown feature '{}'", features[0])))?,
        feature_column(&features[1]).ok_or_else(|| Error::invalid(format!("unknown feature '{}'", features[1])))?,
    ];

    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let indices_train = order[..n_train].to_vec();
    let indices_val = order[n_train..n_train + n_val].to_vec();

    let train_rows = || indices_train.iter().map(|&i| &raw.rows[i]);
    let scaler = ScalerParams {
        features: [
            MinMax::fit(train_rows().map(|r| r[cols[0]]), -PI, PI)?,
            MinMax::fit(train_rows().map(|r| r[cols[1]]), -PI, PI)?,
        ],
        target: MinMax::fit(train_rows().map(|r| r[TARGET_COLUMN]), -1.0, 1.0)?,
    };
    let scale = |idx: &[usize]| -> Vec<Sample> {
        idx.iter()
            .map(|&i| {
                let r = &raw.rows[i];
                Sample {
                    features: [scaler.features[0].transform(r[cols[0]]), scaler.features[1].transform(r[cols[1]])],
                    target: scaler.target.transform(r[TARGET_COLUMN]),
                }
            })
            .collect()
    };
    Ok(PreparedDataset {
        train: scale(&indices_train),
        validation: scale(&indices_val),
        scaler: Some(scaler),
        split_seed: seed,
        feature_names: features.clone(),
        indices_train,
        indices_val,
    })
}
