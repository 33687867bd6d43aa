use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MlError {
    #[error("dataset is empty")]
    Empty,
    #[error("rows, labels and ids differ in length")]
    LengthMismatch,
    #[error("row {row} has width {got}, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("label {0} is not 0 or 1")]
    BadLabel(u8),
    #[error("only one class present")]
    SingleClass,
    #[error("class {class} has {count} rows; at least 2 are needed")]
    ClassTooSmall { class: u8, count: usize },
    #[error("train fraction must lie strictly between 0 and 1")]
    BadFraction,
    #[error("need at least 2 minority rows, got {0}")]
    TooFewMinority(usize),
    #[error("k = {k} exceeds minority count - 1 = {max}")]
    KTooLarge { k: usize, max: usize },
    #[error("row width {got} does not match model width {expected}")]
    WidthMismatch { got: usize, expected: usize },
    #[error("invalid hyperparameter: {0}")]
    Hyperparam(&'static str),
}

/// Labeled row-major feature matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub ids: Vec<String>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>, ids: Vec<String>) -> Result<Self, MlError> {
        let d = Dataset { rows, labels, ids };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), MlError> {
        if self.rows.len() != self.labels.len() || self.rows.len() != self.ids.len() {
            return Err(MlError::LengthMismatch);
        }
        let expected = self.width();
        for (row, r) in self.rows.iter().enumerate() {
            if r.len() != expected {
                return Err(MlError::RaggedRow { row, got: r.len(), expected });
            }
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l > 1) {
            return Err(MlError::BadLabel(bad));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn count(&self, class: u8) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>, label: u8, id: String) {
        self.rows.push(row);
        self.labels.push(label);
        self.ids.push(id);
    }
}

/// Per-class shuffled split. The test share of each class is
/// `round((1 - train_fraction) * n)`, clamped to `[1, n - 1]`; train takes the
/// rest. Both halves keep the original row order.
pub fn stratified_split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset), MlError> {
    d.validate()?;
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(MlError::BadFraction);
    }
    if d.is_empty() {
        return Err(MlError::Empty);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut rng = rng::seeded(seed);
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..d.len()).filter(|&i| d.labels[i] == class).collect();
        if idx.len() < 2 {
            return Err(if d.count(1 - class) == d.len() {
                MlError::SingleClass
            } else {
                MlError::ClassTooSmall { class, count: idx.len() }
            });
        }
        idx.shuffle(&mut rng);
        let n = idx.len();
        let n_test = (libm::round((1.0 - train_fraction) * n as f64) as usize).clamp(1, n - 1);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((d.subset(&train), d.subset(&test)))
}
