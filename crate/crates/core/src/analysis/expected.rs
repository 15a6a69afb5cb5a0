use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::combinatorics::{binomial_f64, enumerate_cycle_representatives};
use crate::coding::{build_crc, Scheme};
use crate::decoding::optimal_decode;
use crate::error::check_probability;
use crate::{Error, Result};

/// Probability of exactly `r` non-stragglers when `m` of `n` workers are slow.
///
/// `i` counts surviving slow workers and runs over the window where both binomials
/// are non-zero, `max(0, r - (n - m)) <= i <= min(r, m)`.
pub fn prob_nonstragglers(n: usize, m: usize, p_ss: f64, p_as: f64, r: usize) -> Result<f64> {
    check_probability("p_ss", p_ss)?;
    check_probability("p_as", p_as)?;
    if m > n || r > n {
        return Err(Error::InvalidParameter(format!("need m <= n and r <= n (n={n}, m={m}, r={r})")));
    }
    let active = n - m;
    let lo = r.saturating_sub(active);
    let hi = r.min(m);
    let mut total = 0.0;
    for i in lo..=hi {
        let slow_ok = (1.0 - p_ss).powi(i as i32) * p_ss.powi((m - i) as i32);
        let active_ok = (1.0 - p_as).powi((r - i) as i32) * p_as.powi((active - (r - i)) as i32);
        total += binomial_f64(m, i) * binomial_f64(active, r - i) * slow_ok * active_ok;
    }
    Ok(total)
}

/// Mean error over all `r`-column submatrices of `FRC(n, s)`: `n C(n-s, r) / C(n, r)`.
pub fn frc_conditional_error(n: usize, s: usize, r: usize) -> f64 {
    n as f64 * binomial_f64(n - s, r) / binomial_f64(n, r)
}

/// Mean error over all `r`-column submatrices of `CRC(n, s)`, for every `r` in `0..=n`.
///
/// One decode per rotation class, weighted by the class order.
pub fn crc_conditional_errors(n: usize, s: usize) -> Result<Vec<f64>> {
    let b = build_crc(n, s)?;
    (0..=n)
        .map(|r| {
            let classes = enumerate_cycle_representatives(n, r)?;
            let per_class: Vec<f64> = classes
                .par_iter()
                .map(|class| {
                    let a = b.nonstraggler_submatrix(&class.positions()).expect("positions in range");
                    let d = optimal_decode(&a);
                    let err = if d.exact { 0.0 } else { d.err };
                    class.order() as f64 * err
                })
                .collect();
            Ok(per_class.iter().sum::<f64>() / binomial_f64(n, r))
        })
        .collect()
}

/// Mean error over `r`-subsets for every `r`, by whichever route fits the scheme.
pub fn conditional_errors(scheme: Scheme, n: usize, s: usize) -> Result<Vec<f64>> {
    match scheme {
        Scheme::Frc => {
            crate::coding::build_frc(n, s)?;
            Ok((0..=n).map(|r| frc_conditional_error(n, s, r)).collect())
        }
        Scheme::Crc => crc_conditional_errors(n, s),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakdownEntry {
    pub r: usize,
    #[serde(rename = "P_r")]
    pub p_r: f64,
    pub cond_err: f64,
}

/// Expected optimal decoding error per iteration with uniform shuffling.
///
/// `breakdown` covers every `r` in `0..=n`. For FRC, and for CRC when `s | n`,
/// the entries with `r > n - s` are zero; otherwise the non-zero tail is kept in
/// `expected_err` rather than dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub scheme: Scheme,
    pub n: usize,
    pub s: usize,
    /// Set for the marginal over the number of slow workers.
    pub p_hat: Option<f64>,
    /// Set when conditioned on exactly `m` slow workers.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<usize>,
    pub p_ss: f64,
    pub p_as: f64,
    pub expected_err: f64,
    pub breakdown: Vec<BreakdownEntry>,
}

impl ErrorReport {
    /// Survivor counts above `n - s` whose mean error is not zero.
    pub fn exactness_violations(&self) -> Vec<usize> {
        self.breakdown.iter().filter(|b| b.r + self.s > self.n && b.cond_err > 0.0).map(|b| b.r).collect()
    }
}

fn breakdown(probs: Vec<f64>, cond: &[f64]) -> Vec<BreakdownEntry> {
    probs.into_iter().zip(cond).enumerate().map(|(r, (p_r, &cond_err))| BreakdownEntry { r, p_r, cond_err }).collect()
}

fn conditional_report(
    scheme: Scheme,
    n: usize,
    m: usize,
    s: usize,
    p_ss: f64,
    p_as: f64,
    cond: &[f64],
) -> Result<ErrorReport> {
    let probs = (0..=n).map(|r| prob_nonstragglers(n, m, p_ss, p_as, r)).collect::<Result<Vec<_>>>()?;
    let breakdown = breakdown(probs, cond);
    let expected_err = breakdown.iter().map(|b| b.p_r * b.cond_err).sum();
    Ok(ErrorReport { scheme, n, s, p_hat: None, m: Some(m), p_ss, p_as, expected_err, breakdown })
}

/// Expected error of shuffled FRC given exactly `m` slow workers.
pub fn expected_err_frc_cond(n: usize, m: usize, s: usize, p_ss: f64, p_as: f64) -> Result<ErrorReport> {
    let cond = conditional_errors(Scheme::Frc, n, s)?;
    conditional_report(Scheme::Frc, n, m, s, p_ss, p_as, &cond)
}

/// Expected error of shuffled CRC given exactly `m` slow workers.
pub fn expected_err_crc_cond(n: usize, m: usize, s: usize, p_ss: f64, p_as: f64) -> Result<ErrorReport> {
    let cond = conditional_errors(Scheme::Crc, n, s)?;
    conditional_report(Scheme::Crc, n, m, s, p_ss, p_as, &cond)
}

pub fn expected_err_cond(scheme: Scheme, n: usize, m: usize, s: usize, p_ss: f64, p_as: f64) -> Result<ErrorReport> {
    match scheme {
        Scheme::Frc => expected_err_frc_cond(n, m, s, p_ss, p_as),
        Scheme::Crc => expected_err_crc_cond(n, m, s, p_ss, p_as),
    }
}

/// Expected error with the number of slow workers drawn from `Binomial(n, p_hat)`.
pub fn expected_err_total(scheme: Scheme, n: usize, s: usize, p_hat: f64, p_ss: f64, p_as: f64) -> Result<ErrorReport> {
    check_probability("p_hat", p_hat)?;
    let cond = conditional_errors(scheme, n, s)?;
    let mut expected_err = 0.0;
    let mut marginal = vec![0.0; n + 1];
    for m in 0..=n {
        let p_m = binomial_f64(n, m) * p_hat.powi(m as i32) * (1.0 - p_hat).powi((n - m) as i32);
        let given_m = conditional_report(scheme, n, m, s, p_ss, p_as, &cond)?;
        expected_err += p_m * given_m.expected_err;
        for (acc, b) in marginal.iter_mut().zip(&given_m.breakdown) {
            *acc += p_m * b.p_r;
        }
    }
    let breakdown = breakdown(marginal, &cond);
    Ok(ErrorReport { scheme, n, s, p_hat: Some(p_hat), m: None, p_ss, p_as, expected_err, breakdown })
}

/// Expected number of iterations (out of `iterations`) in which a partition is never read.
///
/// `slow_holders` is the number of slow workers among the partition's `s` holders;
/// it only matters without shuffling.
pub fn unaccessed_expectation(
    iterations: usize,
    s: usize,
    slow_holders: usize,
    p_hat: f64,
    p_ss: f64,
    p_as: f64,
    shuffled: bool,
) -> Result<f64> {
    check_probability("p_hat", p_hat)?;
    check_probability("p_ss", p_ss)?;
    check_probability("p_as", p_as)?;
    if slow_holders > s {
        return Err(Error::InvalidParameter(format!("k={slow_holders} exceeds s={s}")));
    }
    let per_iteration = if shuffled {
        (p_hat * p_ss + (1.0 - p_hat) * p_as).powi(s as i32)
    } else {
        p_ss.powi(slow_holders as i32) * p_as.powi((s - slow_holders) as i32)
    };
    Ok(iterations as f64 * per_iteration)
}
