//! Iteration loop: shuffle, straggle, decode, update.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::dataset::{partition_dataset, Dataset, PartitionedDataset};
use super::model::{accumulate_gradient, default_step_size, gd_step, objective};
use super::sig10;
use crate::analysis::unaccessed_expectation;
use crate::coding::{EncodingMatrix, NonStragglerMatrix};
use crate::decoding::{optimal_decode, DecodeResult};
use crate::rng::{substream, Stream};
use crate::shuffling::{next_permutation, Permutation, ShuffleStrategy};
use crate::stragglers::{draw_realization, ClassAssignment, Realization, StragglerParams, WorkerClass};
use crate::{Error, Result};

/// Coding-side state of one iteration.
#[derive(Clone, Debug)]
pub struct IterationCoding {
    pub permutation: Permutation,
    pub realization: Realization,
    pub matrix: NonStragglerMatrix,
    pub decode: DecodeResult,
}

impl IterationCoding {
    pub fn accessed(&self) -> Vec<bool> {
        self.matrix.accessed()
    }
}

/// Straggler and shuffling machinery shared by training and access simulation.
#[derive(Clone, Debug)]
pub struct Engine {
    encoding: EncodingMatrix,
    classes: ClassAssignment,
    params: StragglerParams,
    strategy: ShuffleStrategy,
    seed: u64,
}

impl Engine {
    pub fn new(
        encoding: EncodingMatrix,
        classes: ClassAssignment,
        params: StragglerParams,
        strategy: ShuffleStrategy,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        if classes.n() != encoding.n() {
            return Err(Error::DimensionMismatch { expected: encoding.n(), found: classes.n() });
        }
        Ok(Engine { encoding, classes, params, strategy, seed })
    }

    pub fn from_config(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        Engine::new(config.encoding()?, config.class_assignment()?, config.params(), config.shuffle, config.seed)
    }

    pub fn encoding(&self) -> &EncodingMatrix {
        &self.encoding
    }

    pub fn classes(&self) -> &ClassAssignment {
        &self.classes
    }

    /// Iteration `iteration` (1-based), drawn from its own substreams.
    pub fn step(&self, iteration: usize) -> IterationCoding {
        let n = self.encoding.n();
        let mut shuffle_rng = substream(self.seed, Stream::Shuffle, iteration as u64);
        let permutation = next_permutation(self.strategy, n, iteration, &mut shuffle_rng);
        let mut straggle_rng = substream(self.seed, Stream::Stragglers, iteration as u64);
        let realization = draw_realization(&self.classes, &self.params, iteration, &mut straggle_rng);
        let columns = permutation.columns_for(&realization.nonstragglers);
        let matrix = self.encoding.nonstraggler_submatrix(&columns).expect("permutation yields distinct columns");
        let decode = optimal_decode(&matrix);
        IterationCoding { permutation, realization, matrix, decode }
    }

    /// Slow workers among each partition's holders before any shuffling.
    pub fn slow_holders(&self) -> Vec<usize> {
        (0..self.encoding.n())
            .map(|i| {
                self.encoding
                    .assigned_workers(i)
                    .expect("partition in range")
                    .into_iter()
                    .filter(|&w| self.classes.class_of(w) == WorkerClass::Slow)
                    .count()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub r: usize,
    pub err: f64,
    pub loss: f64,
    pub exact: bool,
    pub accessed: Vec<bool>,
}

impl IterationRecord {
    pub fn num_unaccessed(&self) -> usize {
        self.accessed.iter().filter(|a| !**a).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub final_beta: Vec<f64>,
    /// Iterations in which each partition was read by at least one non-straggler.
    pub access_counts: Vec<usize>,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub eta: f64,
    pub num_points: usize,
    pub labels: Vec<WorkerClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_star: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<IterationRecord>,
    pub summary: ExperimentSummary,
}

/// Runs `config.iterations` rounds of coded gradient descent from `beta = 0`.
///
/// Each round the master combines the surviving workers' outputs with the
/// optimal decoding vector `x`. The aggregate is computed as `sum_i w_i g_i`
/// with `w = A x`, which equals `F^T x` for worker outputs `F`; summing in
/// partition order makes an all-exact run reproduce centralized descent.
pub fn run_experiment(
    config: &ExperimentConfig,
    data: Dataset,
    beta_star: Option<Vec<f64>>,
) -> Result<ExperimentOutput> {
    let engine = Engine::from_config(config)?;
    if data.task() != config.model {
        return Err(Error::InvalidParameter(format!(
            "dataset task {} does not match model {}",
            data.task(),
            config.model
        )));
    }
    let parts: PartitionedDataset = partition_dataset(data, config.n)?;
    let data = parts.data();
    let eta = config.eta.unwrap_or_else(|| default_step_size(data));
    let n = config.n;

    let mut beta = vec![0.0; data.dim()];
    let mut records = Vec::with_capacity(config.iterations);
    let mut access_counts = vec![0usize; n];

    for iteration in 1..=config.iterations {
        let coding = engine.step(iteration);
        let weights = coding.decode.partition_weights(&coding.matrix);
        let mut gradient = vec![0.0; data.dim()];
        for (i, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                accumulate_gradient(data, parts.range(i), &beta, w, &mut gradient);
            }
        }
        for (g, b) in gradient.iter_mut().zip(&beta) {
            *g += config.lambda * b;
        }
        if gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration });
        }
        beta = gd_step(&beta, &gradient, eta)?;

        let accessed = coding.accessed();
        for (count, &hit) in access_counts.iter_mut().zip(&accessed) {
            *count += usize::from(hit);
        }
        records.push(IterationRecord {
            iteration,
            r: coding.realization.r(),
            err: coding.decode.err,
            loss: objective(data, &beta, config.lambda),
            exact: coding.decode.exact,
            accessed,
        });
    }

    let summary = ExperimentSummary {
        final_beta: beta,
        access_counts,
        config: config.clone(),
        seed: config.seed,
        eta,
        num_points: data.len(),
        labels: engine.classes().labels().to_vec(),
        beta_star,
    };
    Ok(ExperimentOutput { records, summary })
}

/// Per-iteration CSV: `iteration,r,err,loss,num_unaccessed`.
pub fn records_to_csv(records: &[IterationRecord]) -> String {
    let mut out = String::from("iteration,r,err,loss,num_unaccessed\n");
    for rec in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            rec.iteration,
            rec.r,
            sig10(if rec.exact { 0.0 } else { rec.err }),
            sig10(rec.loss),
            rec.num_unaccessed()
        );
    }
    out
}

/// Access statistics of a coding-only run (no model).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccessSimulation {
    pub iterations: usize,
    pub shuffled: bool,
    pub labels: Vec<WorkerClass>,
    /// Slow holders of each partition in the unshuffled assignment.
    pub slow_holders: Vec<usize>,
    pub unaccessed_counts: Vec<usize>,
    /// Expected unaccessed count per partition.
    pub expected_unaccessed: Vec<f64>,
    pub mean_err: f64,
    pub mean_r: f64,
}

/// Runs the coding side of `config` for `config.iterations` rounds.
pub fn simulate_access(config: &ExperimentConfig) -> Result<AccessSimulation> {
    let engine = Engine::from_config(config)?;
    let n = config.n;
    let mut unaccessed = vec![0usize; n];
    let mut err_sum = 0.0;
    let mut r_sum = 0usize;
    for iteration in 1..=config.iterations {
        let coding = engine.step(iteration);
        for (count, hit) in unaccessed.iter_mut().zip(coding.accessed()) {
            *count += usize::from(!hit);
        }
        err_sum += if coding.decode.exact { 0.0 } else { coding.decode.err };
        r_sum += coding.realization.r();
    }
    let shuffled = config.shuffle == ShuffleStrategy::UniformRandom;
    let slow_holders = engine.slow_holders();
    // with explicit classes the shuffled expectation uses the realized slow fraction
    let p_slow = if config.labels.is_some() || config.m_fixed.is_some() {
        engine.classes().m() as f64 / n as f64
    } else {
        config.p_hat
    };
    let expected_unaccessed = slow_holders
        .iter()
        .map(|&k| unaccessed_expectation(config.iterations, config.s, k, p_slow, config.p_ss, config.p_as, shuffled))
        .collect::<Result<Vec<_>>>()?;
    let iterations = config.iterations.max(1) as f64;
    Ok(AccessSimulation {
        iterations: config.iterations,
        shuffled,
        labels: engine.classes().labels().to_vec(),
        slow_holders,
        unaccessed_counts: unaccessed,
        expected_unaccessed,
        mean_err: err_sum / iterations,
        mean_r: r_sum as f64 / iterations,
    })
}
