//! Heterogeneous straggler model.
//!
//! Each worker is slow with probability `p_hat`, once, for the whole experiment.
//! In every iteration a slow worker straggles with probability `p_ss` and an
//! active one with probability `p_as`, independently of everything else.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::check_probability;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StragglerParams {
    pub p_hat: f64,
    pub p_ss: f64,
    pub p_as: f64,
}

impl StragglerParams {
    pub fn new(p_hat: f64, p_ss: f64, p_as: f64) -> Result<Self> {
        let params = StragglerParams { p_hat, p_ss, p_as };
        params.validate()?;
        Ok(params)
    }

    /// `p_ss == p_as` is allowed so that the iid model is a special case.
    pub fn validate(&self) -> Result<()> {
        check_probability("p_hat", self.p_hat)?;
        check_probability("p_ss", self.p_ss)?;
        check_probability("p_as", self.p_as)?;
        if self.p_ss < self.p_as {
            return Err(Error::InvalidParameter(format!("p_ss={} must be >= p_as={}", self.p_ss, self.p_as)));
        }
        Ok(())
    }

    pub fn straggle_probability(&self, class: WorkerClass) -> f64 {
        match class {
            WorkerClass::Slow => self.p_ss,
            WorkerClass::Active => self.p_as,
        }
    }

    /// Straggle probability of a worker whose class is not yet known.
    pub fn marginal_straggle_probability(&self) -> f64 {
        self.p_hat * self.p_ss + (1.0 - self.p_hat) * self.p_as
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkerClass {
    Slow,
    Active,
}

/// Class label of every worker, fixed for the duration of an experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassAssignment {
    labels: Vec<WorkerClass>,
}

impl ClassAssignment {
    pub fn from_labels(labels: Vec<WorkerClass>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidParameter("class assignment needs at least one worker".into()));
        }
        Ok(ClassAssignment { labels })
    }

    pub fn labels(&self) -> &[WorkerClass] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of slow workers.
    pub fn m(&self) -> usize {
        self.labels.iter().filter(|&&c| c == WorkerClass::Slow).count()
    }

    pub fn class_of(&self, worker: usize) -> WorkerClass {
        self.labels[worker]
    }
}

/// Each worker independently slow with probability `p_hat`.
pub fn assign_classes<R: Rng + ?Sized>(n: usize, p_hat: f64, rng: &mut R) -> Result<ClassAssignment> {
    check_probability("p_hat", p_hat)?;
    let labels = (0..n).map(|_| if rng.random_bool(p_hat) { WorkerClass::Slow } else { WorkerClass::Active }).collect();
    ClassAssignment::from_labels(labels)
}

/// `(n, m)` model: the first `m` workers are slow.
pub fn assign_classes_fixed(n: usize, m: usize) -> Result<ClassAssignment> {
    if m > n {
        return Err(Error::InvalidParameter(format!("m={m} exceeds n={n}")));
    }
    let labels = (0..n).map(|j| if j < m { WorkerClass::Slow } else { WorkerClass::Active }).collect();
    ClassAssignment::from_labels(labels)
}

/// Workers that returned in time during one iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub iteration: usize,
    pub nonstragglers: Vec<usize>,
}

impl Realization {
    pub fn r(&self) -> usize {
        self.nonstragglers.len()
    }
}

pub fn draw_realization<R: Rng + ?Sized>(
    assignment: &ClassAssignment,
    params: &StragglerParams,
    iteration: usize,
    rng: &mut R,
) -> Realization {
    let nonstragglers = assignment
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &class)| !rng.random_bool(params.straggle_probability(class)))
        .map(|(j, _)| j)
        .collect();
    Realization { iteration, nonstragglers }
}
