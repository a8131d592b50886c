// SPDX-License-Identifier: Apache-2.0

//! Dataset ingestion.
//!
//! CSV format: UTF-8, comma separated, `\n` line endings, no quoting. The
//! first line is a header; every later line holds the feature columns as
//! decimal reals followed by an integer class label in the last column.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::rng::TrainRng;
use crate::tensor::Matrix;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema error on line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// Feature matrix with integer class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSet {
    features: Matrix,
    labels: Vec<usize>,
    class_count: usize,
    feature_names: Vec<String>,
}

/// Feature and target matrices as consumed by the MLP.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingData {
    pub features: Matrix,
    pub targets: Matrix,
}

impl TrainingData {
    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }
}

impl LabeledSet {
    pub fn new(features: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Self, DataError> {
        if features.rows() == 0 {
            return Err(DataError::Invalid("dataset has no rows".into()));
        }
        if features.rows() != labels.len() {
            return Err(DataError::Invalid(format!("{} rows but {} labels", features.rows(), labels.len())));
        }
        if class_count == 0 {
            return Err(DataError::Invalid("class count must be positive".into()));
        }
        if let Some(bad) = labels.iter().find(|&&y| y >= class_count) {
            return Err(DataError::Invalid(format!("label {bad} out of range for {class_count} classes")));
        }
        let feature_names = (0..features.cols()).map(|i| format!("x{i}")).collect();
        Ok(Self { features, labels, class_count, feature_names })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    /// Rows at `idx` (repeats allowed), keeping the class count.
    pub fn subset(&self, idx: &[usize]) -> LabeledSet {
        LabeledSet {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Splits into `k` contiguous parts of near-equal size, larger parts first.
    pub fn split_sequential(&self, k: usize) -> Vec<LabeledSet> {
        let k = k.clamp(1, self.len());
        let base = self.len() / k;
        let extra = self.len() % k;
        let mut out = Vec::with_capacity(k);
        let mut start = 0;
        for part in 0..k {
            let size = base + usize::from(part < extra);
            let idx: Vec<usize> = (start..start + size).collect();
            out.push(self.subset(&idx));
            start += size;
        }
        out
    }

    pub fn one_hot(&self) -> Matrix {
        let mut m = Matrix::zeros(self.len(), self.class_count);
        for (r, &y) in self.labels.iter().enumerate() {
            m.set(r, y, 1.0);
        }
        m
    }

    pub fn to_training_data(&self) -> TrainingData {
        TrainingData { features: self.features.clone(), targets: self.one_hot() }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.feature_names.join(","));
        out.push_str(",label\n");
        for (r, y) in self.labels.iter().enumerate() {
            for v in self.features.row(r) {
                // `{}` on f64 prints the shortest string that parses back exactly
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{y}");
        }
        out
    }
}

/// Parses dataset text. With `class_count` unset, it is inferred as the
/// largest label plus one.
pub fn parse_dataset(text: &str, class_count: Option<usize>) -> Result<LabeledSet, DataError> {
    let mut lines = text.split('\n').enumerate();
    let (_, header) = lines.next().ok_or(DataError::Parse { line: 1, message: "missing header".into() })?;
    let columns: Vec<&str> = header.split(',').collect();
    if header.trim().is_empty() || columns.len() < 2 {
        return Err(DataError::Parse { line: 1, message: "header needs at least one feature and a label column".into() });
    }
    let width = columns.len();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let body: Vec<(usize, &str)> = lines.collect();
    let last_index = body.len().saturating_sub(1);
    for (pos, (i, line)) in body.into_iter().enumerate() {
        let line_no = i + 1;
        if line.is_empty() && pos == last_index {
            break;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(DataError::Parse {
                line: line_no,
                message: format!("expected {width} columns, found {}", cells.len()),
            });
        }
        for cell in &cells[..width - 1] {
            let v: f64 = cell.trim().parse().map_err(|_| DataError::Schema {
                line: line_no,
                message: format!("non-numeric feature `{cell}`"),
            })?;
            if !v.is_finite() {
                return Err(DataError::Schema { line: line_no, message: format!("non-finite feature `{cell}`") });
            }
            values.push(v);
        }
        let raw = cells[width - 1].trim();
        let y: usize = raw
            .parse()
            .map_err(|_| DataError::Schema { line: line_no, message: format!("label `{raw}` is not a class index") })?;
        if let Some(c) = class_count {
            if y >= c {
                return Err(DataError::Schema {
                    line: line_no,
                    message: format!("label {y} out of range for {c} classes"),
                });
            }
        }
        labels.push(y);
    }
    if labels.is_empty() {
        return Err(DataError::Invalid("dataset has no rows".into()));
    }
    let classes = class_count.unwrap_or_else(|| labels.iter().max().map_or(1, |m| m + 1));
    let features = Matrix::from_vec(labels.len(), width - 1, values);
    let mut set = LabeledSet::new(features, labels, classes)?;
    set.feature_names = columns[..width - 1].iter().map(|s| s.trim().to_string()).collect();
    Ok(set)
}

pub fn load_dataset(path: &Path, class_count: Option<usize>) -> Result<LabeledSet, DataError> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, class_count)
}

pub fn write_dataset(set: &LabeledSet, path: &Path) -> Result<(), DataError> {
    std::fs::write(path, set.to_csv_string())?;
    Ok(())
}

/// Two isotropic 2-d Gaussian classes centred at (−1, −1) and (+1, +1) with
/// standard deviation 0.75. Labels alternate 0, 1, 0, ... before a seeded
/// shuffle, so any contiguous split is close to balanced.
pub fn two_gaussians(n: usize, seed: u64) -> LabeledSet {
    let mut rng = TrainRng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.75).expect("valid std dev");
    let mut rows: Vec<(f64, f64, usize)> = (0..n)
        .map(|i| {
            let label = i % 2;
            let centre = if label == 0 { -1.0 } else { 1.0 };
            let x = centre + noise.sample(rng.inner_mut());
            let y = centre + noise.sample(rng.inner_mut());
            (x, y, label)
        })
        .collect();
    rows.shuffle(rng.inner_mut());
    let values = rows.iter().flat_map(|&(x, y, _)| [x, y]).collect();
    let labels = rows.iter().map(|r| r.2).collect();
    LabeledSet::new(Matrix::from_vec(n, 2, values), labels, 2).expect("fixture is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_plus_two_rows() {
        let set = parse_dataset("a,b,label\n0.5,1,0\n-2,3.25,1\n", None).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.class_count(), 2);
        assert_eq!(set.sample(1), &[-2.0, 3.25]);
        assert_eq!(set.one_hot().as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn label_out_of_declared_range() {
        let err = parse_dataset("a,label\n1.0,0\n2.0,2\n", Some(2)).unwrap_err();
        assert!(matches!(err, DataError::Schema { line: 3, .. }), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_dataset("a,b,label\n1,2,0\n1,0\n", None).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 3, .. }), "{err}");
        let err = parse_dataset("a,label\nx,0\n", None).unwrap_err();
        assert!(matches!(err, DataError::Schema { line: 2, .. }), "{err}");
        let err = parse_dataset("a,label\n1.5,-1\n", None).unwrap_err();
        assert!(matches!(err, DataError::Schema { line: 2, .. }), "{err}");
        assert!(parse_dataset("a,label\n", None).is_err());
        assert!(matches!(parse_dataset("", None), Err(DataError::Parse { line: 1, .. })));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let set = two_gaussians(40, 3);
        let back = parse_dataset(&set.to_csv_string(), Some(2)).unwrap();
        assert_eq!(back, set);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let small = parse_dataset("u,v,label\n0.5,0.25,1\n-1.125,8,0\n", None).unwrap();
        write_dataset(&small, &path).unwrap();
        assert_eq!(load_dataset(&path, None).unwrap(), small);
    }

    #[test]
    fn sequential_split_covers_everything() {
        let set = two_gaussians(200, 1);
        let parts = set.split_sequential(3);
        assert_eq!(parts.iter().map(LabeledSet::len).collect::<Vec<_>>(), vec![67, 67, 66]);
        assert_eq!(parts[2].sample(65), set.sample(199));
    }

    #[test]
    fn fixture_is_balanced_and_seeded() {
        let a = two_gaussians(200, 9);
        assert_eq!(a, two_gaussians(200, 9));
        assert_ne!(a, two_gaussians(200, 10));
        assert_eq!(a.labels().iter().filter(|&&y| y == 1).count(), 100);
    }
}
