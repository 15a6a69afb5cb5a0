//! Self-check suite behind the `validate` command.
//!
//! Compares the closed forms against exhaustive enumeration and checks the
//! counting identities. The routines under test are passed in through
//! [`Targets`] so a deliberately broken implementation can be substituted.

use num_bigint::BigUint;
use serde::Serialize;

use crate::analysis::{
    binomial, brute_force_conditional_err, crc_conditional_errors, cycle_class_count, cycle_class_total, divisors,
    enumerate_cycle_representatives, frc_conditional_error, prob_nonstragglers,
};
use crate::coding::{build_crc, build_frc};
use crate::Result;

pub const DEFAULT_MAX_N: usize = 10;

const ORACLE_TOL: f64 = 1e-9;
const NORMALIZATION_TOL: f64 = 1e-12;
const PROB_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Clone, Copy)]
pub struct Targets {
    pub frc_conditional: fn(usize, usize, usize) -> f64,
    pub crc_conditional: fn(usize, usize) -> Result<Vec<f64>>,
    pub prob_nonstragglers: fn(usize, usize, f64, f64, usize) -> Result<f64>,
}

impl Default for Targets {
    fn default() -> Self {
        Targets { frc_conditional: frc_conditional_error, crc_conditional: crc_conditional_errors, prob_nonstragglers }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub max_n: usize,
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_counterexample(&self) -> Option<&str> {
        self.checks.iter().find_map(|c| c.counterexample.as_deref())
    }
}

struct Check {
    name: String,
    cases: usize,
    counterexample: Option<String>,
}

impl Check {
    fn new(name: &str) -> Self {
        Check { name: name.to_string(), cases: 0, counterexample: None }
    }

    /// Records one case; keeps only the first failure.
    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(describe());
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            passed: self.counterexample.is_none(),
            name: self.name,
            cases: self.cases,
            counterexample: self.counterexample,
        }
    }
}

pub fn run_validation(max_n: usize, targets: &Targets) -> Result<ValidationReport> {
    let mut checks = Vec::new();

    let mut frc = Check::new("frc closed form vs subset enumeration");
    let mut crc = Check::new("crc class sum vs subset enumeration");
    for n in 2..=max_n {
        for s in [2usize, 3] {
            if s > n {
                continue;
            }
            let crc_b = build_crc(n, s)?;
            let crc_cond = (targets.crc_conditional)(n, s)?;
            for (r, &got) in crc_cond.iter().enumerate().take(n - s + 1) {
                let bf = brute_force_conditional_err(&crc_b, r)?;
                crc.case((got - bf).abs() <= ORACLE_TOL, || {
                    format!("n={n} s={s} r={r}: class sum {got} vs enumeration {bf}")
                });
            }
            if n % s == 0 {
                let frc_b = build_frc(n, s)?;
                for r in 0..=n - s {
                    let bf = brute_force_conditional_err(&frc_b, r)?;
                    let got = (targets.frc_conditional)(n, s, r);
                    frc.case((got - bf).abs() <= ORACLE_TOL, || {
                        format!("n={n} s={s} r={r}: closed form {got} vs enumeration {bf}")
                    });
                }
            }
        }
    }
    checks.push(frc.finish());
    checks.push(crc.finish());

    let mut norm = Check::new("P_r sums to one");
    for n in 1..=max_n.max(1) {
        for m in 0..=n {
            for &p_ss in &PROB_GRID {
                for &p_as in &PROB_GRID {
                    let total =
                        (0..=n).map(|r| (targets.prob_nonstragglers)(n, m, p_ss, p_as, r)).sum::<Result<f64>>()?;
                    norm.case((total - 1.0).abs() <= NORMALIZATION_TOL, || {
                        format!("n={n} m={m} p_ss={p_ss} p_as={p_as}: sum {total}")
                    });
                }
            }
        }
    }
    checks.push(norm.finish());

    let mut identity = Check::new("sum_e e*N(r,e) = C(n,r)");
    for n in 1..=20.max(max_n) {
        for r in 0..=n {
            let total: BigUint = divisors(n)
                .into_iter()
                .map(|e| cycle_class_count(n, r, e).map(|c| c * BigUint::from(e)))
                .sum::<Result<BigUint>>()?;
            let want = binomial(n, r);
            identity.case(total == want, || format!("n={n} r={r}: {total} vs {want}"));
        }
    }
    checks.push(identity.finish());

    let mut enumeration = Check::new("enumerated classes = N_r");
    for n in 1..=max_n.min(16) {
        for r in 0..=n {
            let listed = enumerate_cycle_representatives(n, r)?.len();
            let want = cycle_class_total(n, r)?;
            enumeration.case(BigUint::from(listed) == want, || format!("n={n} r={r}: {listed} listed vs N_r={want}"));
        }
    }
    checks.push(enumeration.finish());

    Ok(ValidationReport { max_n, checks })
}
