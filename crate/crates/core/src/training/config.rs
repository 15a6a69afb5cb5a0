use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dataset::{load_csv, synthetic_dataset, Dataset, Task};
use crate::coding::{EncodingMatrix, Scheme};
use crate::rng::{substream, SimRng, Stream};
use crate::shuffling::ShuffleStrategy;
use crate::stragglers::{assign_classes, assign_classes_fixed, ClassAssignment, StragglerParams, WorkerClass};
use crate::{Error, Result};

/// One JSON document describing an analysis or training run.
///
/// Class labels are resolved in priority order: explicit `labels`, then
/// `m_fixed` (first `m` workers slow), then a draw with probability `p_hat`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub n: usize,
    pub s: usize,
    #[serde(default)]
    pub shuffle: ShuffleStrategy,
    #[serde(rename = "L", default = "default_iterations")]
    pub iterations: usize,
    pub p_hat: f64,
    pub p_ss: f64,
    pub p_as: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_fixed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<WorkerClass>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetSource>,
}

fn default_iterations() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSource {
    Path(PathBuf),
    Synthetic(SyntheticSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Defaults to the config's `model`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Task>,
    #[serde(rename = "N")]
    pub points: usize,
    pub a: usize,
    #[serde(default)]
    pub noise: f64,
    /// Dataset seed; defaults to the experiment seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn params(&self) -> StragglerParams {
        StragglerParams { p_hat: self.p_hat, p_ss: self.p_ss, p_as: self.p_as }
    }

    pub fn validate(&self) -> Result<()> {
        EncodingMatrix::build(self.scheme, self.n, self.s)?;
        self.params().validate()?;
        if let Some(m) = self.m_fixed {
            if m > self.n {
                return Err(Error::InvalidParameter(format!("m_fixed={m} exceeds n={}", self.n)));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: labels.len() });
            }
        }
        if let Some(eta) = self.eta {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::InvalidParameter(format!("eta={eta} must be positive")));
            }
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda={} must be >= 0", self.lambda)));
        }
        if let Some(DatasetSource::Synthetic(spec)) = &self.dataset {
            if spec.points == 0 || spec.a == 0 {
                return Err(Error::InvalidParameter("synthetic dataset needs N >= 1 and a >= 1".into()));
            }
        }
        Ok(())
    }

    pub fn encoding(&self) -> Result<EncodingMatrix> {
        EncodingMatrix::build(self.scheme, self.n, self.s)
    }

    pub fn class_assignment(&self) -> Result<ClassAssignment> {
        if let Some(labels) = &self.labels {
            return ClassAssignment::from_labels(labels.clone());
        }
        if let Some(m) = self.m_fixed {
            return assign_classes_fixed(self.n, m);
        }
        let mut rng: SimRng = substream(self.seed, Stream::Classes, 0);
        assign_classes(self.n, self.p_hat, &mut rng)
    }

    /// Loads or generates the dataset; relative paths resolve against `base_dir`.
    ///
    /// Synthetic data also returns the generating parameter vector.
    pub fn load_dataset(&self, base_dir: &Path) -> Result<(Dataset, Option<Vec<f64>>)> {
        match &self.dataset {
            None => Err(Error::InvalidParameter("config has no dataset".into())),
            Some(DatasetSource::Path(path)) => {
                let path = if path.is_relative() { base_dir.join(path) } else { path.clone() };
                Ok((load_csv(&path, self.model)?, None))
            }
            Some(DatasetSource::Synthetic(spec)) => {
                let mut rng = substream(spec.seed.unwrap_or(self.seed), Stream::Dataset, 0);
                let (data, beta_star) =
                    synthetic_dataset(spec.kind.unwrap_or(self.model), spec.points, spec.a, spec.noise, &mut rng)?;
                if data.task() != self.model {
                    return Err(Error::InvalidParameter(format!(
                        "synthetic kind {} does not match model {}",
                        data.task(),
                        self.model
                    )));
                }
                Ok((data, Some(beta_star)))
            }
        }
    }
}
