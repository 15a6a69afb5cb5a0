use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::combinatorics::binomial;
use crate::coding::{EncodingMatrix, Scheme};
use crate::decoding::optimal_decode;
use crate::rng::{substream, SimRng, Stream};
use crate::shuffling::{next_permutation, ShuffleStrategy};
use crate::stragglers::{assign_classes, assign_classes_fixed, draw_realization, ClassAssignment, StragglerParams};
use crate::{Error, Result};

/// Largest number of subsets [`brute_force_conditional_err`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

const CHUNK: usize = 4096;

/// Mean of `err(A)` over every `r`-column submatrix of `b`.
pub fn brute_force_conditional_err(b: &EncodingMatrix, r: usize) -> Result<f64> {
    let n = b.n();
    if r > n {
        return Err(Error::InvalidParameter(format!("r={r} exceeds n={n}")));
    }
    let count: u128 = binomial(n, r).try_into().unwrap_or(u128::MAX);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManySubsets { count, limit: BRUTE_FORCE_LIMIT });
    }
    let mut total = 0.0;
    // fixed chunking keeps the summation order independent of thread count
    for chunk in &(0..n).combinations(r).chunks(CHUNK) {
        let subsets: Vec<Vec<usize>> = chunk.collect();
        let errs: Vec<f64> = subsets
            .par_iter()
            .map(|cols| optimal_decode(&b.nonstraggler_submatrix(cols).expect("valid subset")).err)
            .collect();
        total += errs.iter().sum::<f64>();
    }
    Ok(total / count as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Monte-Carlo estimate of the expected decoding error of one shuffled iteration.
///
/// Each trial draws fresh classes, a straggler realization and a uniform column
/// permutation from its own substream of `seed`.
pub fn monte_carlo_err(
    scheme: Scheme,
    n: usize,
    s: usize,
    params: &StragglerParams,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    params.validate()?;
    run_trials(scheme, n, s, params, trials, seed, |rng| assign_classes(n, params.p_hat, rng).expect("validated p_hat"))
}

/// As [`monte_carlo_err`], with exactly `m` slow workers in every trial.
pub fn monte_carlo_err_cond(
    scheme: Scheme,
    n: usize,
    m: usize,
    s: usize,
    params: &StragglerParams,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    params.validate()?;
    let classes = assign_classes_fixed(n, m)?;
    run_trials(scheme, n, s, params, trials, seed, |_| classes.clone())
}

fn run_trials<F>(
    scheme: Scheme,
    n: usize,
    s: usize,
    params: &StragglerParams,
    trials: usize,
    seed: u64,
    classes: F,
) -> Result<McEstimate>
where
    F: Fn(&mut SimRng) -> ClassAssignment + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let b = EncodingMatrix::build(scheme, n, s)?;
    let errs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, Stream::Trial, t as u64);
            let classes = classes(&mut rng);
            let realization = draw_realization(&classes, params, 1, &mut rng);
            let perm = next_permutation(ShuffleStrategy::UniformRandom, n, 1, &mut rng);
            let cols = perm.columns_for(&realization.nonstragglers);
            let d = optimal_decode(&b.nonstraggler_submatrix(&cols).expect("permuted columns are distinct"));
            if d.exact {
                0.0
            } else {
                d.err
            }
        })
        .collect();
    let count = trials as f64;
    let mean = errs.iter().sum::<f64>() / count;
    let std_error = if trials > 1 {
        let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate { estimate: mean, std_error, trials })
}
