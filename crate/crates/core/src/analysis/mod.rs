//! Closed-form expected decoding errors and the oracles that check them.
//!
//! Under uniform shuffling every `r`-subset of columns of `B` is equally likely
//! to be the surviving set, so the expected error splits into the probability
//! `P_r` of `r` survivors times the mean error over `r`-column submatrices.
//! For FRC that mean has a binomial closed form; for CRC it is a weighted sum
//! over rotation classes of `r`-subsets, one decode per class.

mod combinatorics;
mod expected;
mod oracle;

pub use combinatorics::{
    binomial, cycle_class_count, cycle_class_total, divisors, enumerate_cycle_representatives, moebius, CycleClass,
    MAX_BITS,
};
pub use expected::{
    conditional_errors, crc_conditional_errors, expected_err_cond, expected_err_crc_cond, expected_err_frc_cond,
    expected_err_total, frc_conditional_error, prob_nonstragglers, unaccessed_expectation, BreakdownEntry, ErrorReport,
};
pub use oracle::{brute_force_conditional_err, monte_carlo_err, monte_carlo_err_cond, McEstimate, BRUTE_FORCE_LIMIT};
