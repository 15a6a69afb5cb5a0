//! Gradient descent under the straggler model, end to end.

mod config;
mod dataset;
mod experiment;
mod model;

pub use config::{DatasetSource, ExperimentConfig, SyntheticSpec};
pub use dataset::{load_csv, partition_dataset, synthetic_dataset, Dataset, PartitionedDataset, Task};
pub use experiment::{
    records_to_csv, run_experiment, simulate_access, AccessSimulation, Engine, ExperimentOutput, ExperimentSummary,
    IterationCoding, IterationRecord,
};
pub use model::{default_step_size, gd_step, objective, partial_gradient, point_loss};

/// Rounds to 10 significant digits for printed output.
pub fn sig10(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.9e}").parse().expect("formatted float parses")
}
