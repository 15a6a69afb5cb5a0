use std::fmt;
use std::ops::Range;
use std::path::Path;

use log::warn;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::model::sigmoid;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    #[default]
    Linear,
    Logistic,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Linear => "linear",
            Task::Logistic => "logistic",
        })
    }
}

/// `N` labelled points with `a` features each, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    task: Task,
    dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(task: Task, dim: usize, features: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("feature dimension must be positive".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::DimensionMismatch { expected: dim * labels.len(), found: features.len() });
        }
        if task == Task::Logistic {
            if let Some(bad) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
                return Err(Error::InvalidParameter(format!("logistic label {bad} is not 0 or 1")));
            }
        }
        Ok(Dataset { task, dim, features, labels })
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> (&[f64], f64) {
        (&self.features[i * self.dim..(i + 1) * self.dim], self.labels[i])
    }

    pub fn points(&self, range: Range<usize>) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        range.map(move |i| self.point(i))
    }

    fn truncated(mut self, len: usize) -> Self {
        self.features.truncate(len * self.dim);
        self.labels.truncate(len);
        self
    }
}

/// Headerless CSV: feature columns first, label last.
pub fn load_csv(path: &Path, task: Task) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut dim = None;
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .map(|field| field.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {field:?}: {e}", line + 1))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() < 2 {
            return Err(Error::Parse(format!("line {}: need at least one feature and a label", line + 1)));
        }
        let width = values.len() - 1;
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(Error::Parse(format!("line {}: expected {d} features, found {width}", line + 1)))
            }
            _ => {}
        }
        features.extend_from_slice(&values[..width]);
        labels.push(values[width]);
    }
    let dim = dim.ok_or(Error::EmptyDataset)?;
    Dataset::new(task, dim, features, labels)
}

/// Gaussian features; linear labels `x.beta* + noise`, logistic labels `Bernoulli(sigmoid(x.beta*))`.
///
/// Returns the dataset and `beta*`.
pub fn synthetic_dataset<R: Rng + ?Sized>(
    task: Task,
    points: usize,
    dim: usize,
    noise: f64,
    rng: &mut R,
) -> Result<(Dataset, Vec<f64>)> {
    if points == 0 {
        return Err(Error::EmptyDataset);
    }
    let beta_star: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let mut features = Vec::with_capacity(points * dim);
    let mut labels = Vec::with_capacity(points);
    for _ in 0..points {
        let x: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let z: f64 = x.iter().zip(&beta_star).map(|(a, b)| a * b).sum();
        let y = match task {
            Task::Linear => {
                let eps: f64 = StandardNormal.sample(rng);
                z + noise * eps
            }
            Task::Logistic => {
                if rng.random_bool(sigmoid(z)) {
                    1.0
                } else {
                    0.0
                }
            }
        };
        features.extend(x);
        labels.push(y);
    }
    Ok((Dataset::new(task, dim, features, labels)?, beta_star))
}

/// `n` contiguous, equally sized partitions.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedDataset {
    data: Dataset,
    n: usize,
}

impl PartitionedDataset {
    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn num_partitions(&self) -> usize {
        self.n
    }

    pub fn partition_size(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn range(&self, partition: usize) -> Range<usize> {
        let size = self.partition_size();
        partition * size..(partition + 1) * size
    }
}

/// Drops the last `N mod n` points when `n` does not divide `N`.
pub fn partition_dataset(data: Dataset, n: usize) -> Result<PartitionedDataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one partition".into()));
    }
    if data.len() < n {
        return Err(Error::InvalidParameter(format!("{} points cannot fill {n} partitions", data.len())));
    }
    let keep = data.len() / n * n;
    let data = if keep < data.len() {
        warn!("dropping {} trailing points so that {n} partitions are equal", data.len() - keep);
        data.truncated(keep)
    } else {
        data
    };
    Ok(PartitionedDataset { data, n })
}
