//! Acceptance suite.
//!
//! Runs every acceptance criterion at its stated tolerance and prints one
//! `PASS`/`FAIL` line per criterion. Reference oracles (subset-mask
//! enumeration, Gram-Schmidt projection, rotation-orbit counting, centralized
//! gradient descent) are written here independently of the library code.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gcshuffle::analysis::{
    binomial, brute_force_conditional_err, crc_conditional_errors, cycle_class_count, cycle_class_total, divisors,
    enumerate_cycle_representatives, expected_err_total, frc_conditional_error, monte_carlo_err, prob_nonstragglers,
};
use gcshuffle::coding::{build_crc, build_frc, EncodingMatrix, Scheme};
use gcshuffle::decoding::optimal_decode;
use gcshuffle::stragglers::StragglerParams;
use gcshuffle::training::{run_experiment, simulate_access, ExperimentConfig, Task};
use num_bigint::BigUint;
use rayon::prelude::*;

const N: usize = 8;
const S: usize = 2;
const P_HAT: f64 = 0.3;
const P_SS: f64 = 0.8;
const P_AS: f64 = 0.01;

type Criterion = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("1 reference expected errors", reference_expected_errors),
        ("2 probability normalization", probability_normalization),
        ("3 closed forms vs subset oracle", closed_forms_vs_oracle),
        ("4 cycle class counts", cycle_class_counts),
        ("5 unaccessed partitions", unaccessed_partitions),
        ("6 exact decoding regime", exact_decoding_regime),
        ("7 loss ordering", loss_ordering),
        ("8 cli determinism", cli_determinism),
        ("9 centralized descent equality", centralized_equality),
    ];
    let mut failed = 0;
    for (name, criterion) in criteria {
        let start = Instant::now();
        let outcome = criterion();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!outcome.pass);
        println!("criterion {name}: {status} ({:.1}s) {}", start.elapsed().as_secs_f64(), outcome.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// Columns of `b` as plain vectors.
fn columns(b: &EncodingMatrix) -> Vec<Vec<f64>> {
    let e = b.entries();
    (0..e.ncols()).map(|j| e.column(j).iter().copied().collect()).collect()
}

/// `min_x ||A x - 1||^2` by projecting the all-ones vector onto span(columns).
fn projection_err(cols: &[&Vec<f64>], n: usize) -> f64 {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for col in cols {
        let mut v = (*col).clone();
        for _ in 0..2 {
            for q in &basis {
                let c: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 * scale.max(1.0) {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let captured: f64 = basis.iter().map(|q| q.iter().sum::<f64>().powi(2)).sum();
    (n as f64 - captured).max(0.0)
}

/// Expected error over all 2^n survivor masks with each worker straggling
/// independently with probability `p_straggle`.
fn mask_oracle(b: &EncodingMatrix, p_straggle: f64) -> f64 {
    let n = b.n();
    let cols = columns(b);
    (0u32..1 << n)
        .map(|mask| {
            let survivors: Vec<&Vec<f64>> = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| &cols[j]).collect();
            let r = survivors.len();
            let prob = (1.0 - p_straggle).powi(r as i32) * p_straggle.powi((n - r) as i32);
            prob * projection_err(&survivors, n)
        })
        .sum()
}

fn reference_expected_errors() -> Outcome {
    const REFERENCE: [(Scheme, f64); 2] = [(Scheme::Crc, 0.5173), (Scheme::Frc, 1.976)];
    let start = Instant::now();
    let params = StragglerParams::new(P_HAT, P_SS, P_AS).unwrap();
    let p_straggle = P_HAT * P_SS + (1.0 - P_HAT) * P_AS;
    let mut reproduces_reference = true;
    let mut arbiter_agrees = true;
    let mut mc_agrees = true;
    let mut notes = Vec::new();
    for (scheme, reference) in REFERENCE {
        let closed = expected_err_total(scheme, N, S, P_HAT, P_SS, P_AS).unwrap().expected_err;
        let mc = monte_carlo_err(scheme, N, S, &params, 100_000, 2024).unwrap();
        let oracle = mask_oracle(&EncodingMatrix::build(scheme, N, S).unwrap(), p_straggle);
        reproduces_reference &= (closed - reference).abs() <= 0.005;
        arbiter_agrees &= (closed - oracle).abs() <= 1e-9;
        mc_agrees &= (mc.estimate - closed).abs() <= 3.0 * mc.std_error;
        notes.push(format!(
            "{scheme}: closed {closed:.10} oracle {oracle:.10} mc {:.4}+-{:.4} reference {reference}",
            mc.estimate, mc.std_error
        ));
    }
    let elapsed = start.elapsed();
    let doc = workspace_root().join("docs/reference-values.md");
    let documented = fs::read_to_string(&doc).is_ok_and(|t| t.contains("0.6244123217") && t.contains("0.4880720000"));
    let fast = elapsed < Duration::from_secs(60);
    let verdict = if reproduces_reference {
        "reference values reproduced"
    } else {
        "reference values NOT reproduced; subset oracle is the arbiter, discrepancy documented in docs/reference-values.md"
    };
    let pass = (reproduces_reference || (arbiter_agrees && documented)) && mc_agrees && fast;
    Outcome::new(
        pass,
        format!(
            "{verdict}; oracle agreement {arbiter_agrees}, mc within 3 SE {mc_agrees}, {:.1}s; {}",
            elapsed.as_secs_f64(),
            notes.join("; ")
        ),
    )
}

fn binomial_pmf(n: usize, r: usize, q: f64) -> f64 {
    let coeff = (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    coeff * q.powi(r as i32) * (1.0 - q).powi((n - r) as i32)
}

fn probability_normalization() -> Outcome {
    const GRID: [f64; 5] = [0.0, 0.1, 0.45, 0.8, 1.0];
    let mut worst_sum: f64 = 0.0;
    let mut worst_reduction: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=12 {
        for m in 0..=n {
            for p_ss in GRID {
                for p_as in GRID {
                    let probs: Vec<f64> = (0..=n).map(|r| prob_nonstragglers(n, m, p_ss, p_as, r).unwrap()).collect();
                    worst_sum = worst_sum.max((probs.iter().sum::<f64>() - 1.0).abs());
                    cases += 1;
                    if p_ss == p_as {
                        for (r, p) in probs.iter().enumerate() {
                            worst_reduction = worst_reduction.max((p - binomial_pmf(n, r, 1.0 - p_ss)).abs());
                        }
                    }
                }
            }
        }
    }
    Outcome::new(
        worst_sum <= 1e-12 && worst_reduction <= 1e-12,
        format!("{cases} cases, max |sum - 1| = {worst_sum:.2e}, max binomial deviation = {worst_reduction:.2e}"),
    )
}

fn closed_forms_vs_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut first_bad = None;
    for n in 2..=12 {
        for s in [2usize, 3] {
            if s > n {
                continue;
            }
            let crc = build_crc(n, s).unwrap();
            let crc_cond = crc_conditional_errors(n, s).unwrap();
            let frc = (n % s == 0).then(|| build_frc(n, s).unwrap());
            for (r, &crc_r) in crc_cond.iter().enumerate().take(n - s + 1) {
                let mut compare = |label: &str, got: f64, want: f64| {
                    let diff = (got - want).abs();
                    worst = worst.max(diff);
                    cases += 1;
                    if diff > 1e-9 && first_bad.is_none() {
                        first_bad = Some(format!("{label} n={n} s={s} r={r}: {got} vs {want}"));
                    }
                };
                compare("crc", crc_r, brute_force_conditional_err(&crc, r).unwrap());
                if let Some(frc) = &frc {
                    compare("frc", frc_conditional_error(n, s, r), brute_force_conditional_err(frc, r).unwrap());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        first_bad.is_none() && elapsed < Duration::from_secs(300),
        format!(
            "{cases} (scheme, n, s, r) cases, max deviation {worst:.2e}, {:.1}s{}",
            elapsed.as_secs_f64(),
            first_bad.map(|b| format!(", first mismatch {b}")).unwrap_or_default()
        ),
    )
}

fn rotate(word: u32, n: usize) -> u32 {
    ((word << 1) | (word >> (n - 1))) & ((1 << n) - 1)
}

fn cycle_class_counts() -> Outcome {
    let mut identity_ok = true;
    for n in 1..=20 {
        for r in 0..=n {
            let total: BigUint =
                divisors(n).into_iter().map(|e| cycle_class_count(n, r, e).unwrap() * BigUint::from(e)).sum();
            identity_ok &= total == binomial(n, r);
        }
    }
    let mut enumeration_ok = true;
    let mut orbit_ok = true;
    for n in 1..=16usize {
        // orbits of order e among weight-r words: (#words of order e) / e
        let mut words = vec![vec![0u64; n + 1]; n + 1];
        for word in 0u32..1 << n {
            let mut order = 1;
            let mut w = rotate(word, n);
            while w != word {
                w = rotate(w, n);
                order += 1;
            }
            words[word.count_ones() as usize][order] += 1;
        }
        for (r, by_order) in words.iter().enumerate() {
            for e in divisors(n) {
                orbit_ok &= cycle_class_count(n, r, e).unwrap() == BigUint::from(by_order[e] / e as u64);
            }
            let listed = enumerate_cycle_representatives(n, r).unwrap().len();
            enumeration_ok &= BigUint::from(listed) == cycle_class_total(n, r).unwrap();
        }
    }
    Outcome::new(
        identity_ok && enumeration_ok && orbit_ok,
        format!(
            "identity n<=20 {identity_ok}, enumeration = N_r for n<=16 {enumeration_ok}, rotation-orbit oracle n<=16 {orbit_ok}"
        ),
    )
}

fn config_json(fields: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!("{{{fields}}}")).unwrap()
}

/// Per-partition mean and standard error of unaccessed counts over experiments.
fn unaccessed_stats(runs: &[Vec<usize>], partition: usize) -> (f64, f64) {
    let count = runs.len() as f64;
    let mean = runs.iter().map(|r| r[partition] as f64).sum::<f64>() / count;
    let var = runs.iter().map(|r| (r[partition] as f64 - mean).powi(2)).sum::<f64>() / (count - 1.0);
    (mean, (var / count).sqrt())
}

fn unaccessed_partitions() -> Outcome {
    const EXPERIMENTS: u64 = 10_000;
    const L: usize = 100;
    let run = |extra: &'static str| -> (Vec<usize>, Vec<Vec<usize>>) {
        let sims: Vec<_> = (0..EXPERIMENTS)
            .into_par_iter()
            .map(|seed| {
                let config = config_json(&format!(
                    r#""scheme":"crc","n":{N},"s":{S},"L":{L},"p_hat":{P_HAT},"p_ss":{P_SS},"p_as":{P_AS},"seed":{seed},{extra}"#
                ));
                simulate_access(&config).unwrap()
            })
            .collect();
        (sims[0].slow_holders.clone(), sims.into_iter().map(|s| s.unaccessed_counts).collect())
    };

    let mut pass = true;
    let mut notes = Vec::new();

    let shuffled_target = L as f64 * (P_HAT * P_SS + (1.0 - P_HAT) * P_AS).powi(S as i32);
    let (_, runs) = run(r#""shuffle":"random""#);
    let mut worst_z: f64 = 0.0;
    for i in 0..N {
        let (mean, se) = unaccessed_stats(&runs, i);
        let z = (mean - shuffled_target).abs() / se;
        worst_z = worst_z.max(z);
        pass &= z <= 3.0;
    }
    notes.push(format!("shuffled target {shuffled_target:.4}, worst |z| {worst_z:.2}"));

    let (holders, runs) =
        run(r#""shuffle":"none","labels":["slow","slow","active","active","active","active","active","active"]"#);
    for k in 0..=S {
        let target = L as f64 * P_SS.powi(k as i32) * P_AS.powi((S - k) as i32);
        let mut detail = Vec::new();
        for i in (0..N).filter(|&i| holders[i] == k) {
            let (mean, se) = unaccessed_stats(&runs, i);
            let z = (mean - target).abs() / se;
            pass &= z <= 3.0;
            detail.push(format!("D{i} {mean:.4} (|z| {z:.2})"));
        }
        notes.push(format!("unshuffled k={k} target {target:.4}: {}", detail.join(", ")));
    }
    Outcome::new(pass, format!("{EXPERIMENTS} experiments each; {}", notes.join("; ")))
}

fn exact_decoding_regime() -> Outcome {
    let worst_tail = |b: &EncodingMatrix| -> Vec<(usize, usize, f64)> {
        let n = b.n();
        let s = b.s();
        let mut out = Vec::new();
        for r in n + 1 - s..=n {
            let mut bad = 0;
            let mut worst: f64 = 0.0;
            for mask in 0u32..1 << n {
                if mask.count_ones() as usize != r {
                    continue;
                }
                let workers: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
                let err = optimal_decode(&b.nonstraggler_submatrix(&workers).unwrap()).err;
                if err > 1e-9 {
                    bad += 1;
                    worst = worst.max(err);
                }
            }
            if bad > 0 {
                out.push((r, bad, worst));
            }
        }
        out
    };

    let mut frc_exact = true;
    for n in 1..=12 {
        for s in (1..=n).filter(|s| n % s == 0) {
            frc_exact &= worst_tail(&build_frc(n, s).unwrap()).is_empty();
        }
    }
    let mut crc_violations = Vec::new();
    let mut violation_with_divisor = false;
    for n in 2..=14 {
        for s in [2usize, 3].into_iter().filter(|&s| s <= n) {
            for (r, bad, worst) in worst_tail(&build_crc(n, s).unwrap()) {
                violation_with_divisor |= n % s == 0;
                crc_violations.push(format!("n={n} s={s} r={r}: {bad} subsets, worst err {worst:.4}"));
            }
        }
    }
    Outcome::new(
        frc_exact && !violation_with_divisor,
        format!(
            "FRC exact for every n<=12, s|n: {frc_exact}; CRC exact whenever s|n (n<=14): {}; CRC violations (all with s not dividing n): {}",
            !violation_with_divisor,
            if crc_violations.is_empty() { "none".to_string() } else { crc_violations.join("; ") }
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn loss_ordering() -> Outcome {
    let variant = |scheme: &str, shuffle: &str| -> (f64, f64) {
        let results: Vec<(f64, f64)> = (1..=20u64)
            .into_par_iter()
            .map(|seed| {
                let config = config_json(&format!(
                    r#""scheme":"{scheme}","n":{N},"s":{S},"shuffle":"{shuffle}","L":300,"p_hat":{P_HAT},"p_ss":{P_SS},"p_as":{P_AS},"seed":{seed},"dataset":{{"synthetic":{{"N":800,"a":10,"noise":1.0}}}}"#
                ));
                let (data, beta_star) = config.load_dataset(Path::new(".")).unwrap();
                let out = run_experiment(&config, data, beta_star).unwrap();
                let mean = out.records.iter().map(|r| r.loss).sum::<f64>() / out.records.len() as f64;
                (out.records.last().unwrap().loss, mean)
            })
            .collect();
        (median(results.iter().map(|r| r.0).collect()), median(results.iter().map(|r| r.1).collect()))
    };
    let crc_shuffled = variant("crc", "random");
    let frc_shuffled = variant("frc", "random");
    let crc_plain = variant("crc", "none");
    let ordering_i = crc_shuffled.0 <= frc_shuffled.0;
    let ordering_ii = crc_shuffled.0 <= crc_plain.0;
    Outcome::new(
        ordering_i && ordering_ii,
        format!(
            "median final loss over 20 seeds: crc-shuffled {:.10}, frc-shuffled {:.10}, crc-unshuffled {:.10}; (i) {ordering_i}, (ii) {ordering_ii}; median trajectory-mean loss: {:.4}, {:.4}, {:.4}",
            crc_shuffled.0, frc_shuffled.0, crc_plain.0, crc_shuffled.1, frc_shuffled.1, crc_plain.1
        ),
    )
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cli(args: &[&str], threads: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_gcshuffle"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("cli runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let analyze = dir.path().join("analyze.json");
    let train = dir.path().join("train.json");
    fs::write(
        &analyze,
        format!(r#"{{"scheme":"crc","n":{N},"s":{S},"p_hat":{P_HAT},"p_ss":{P_SS},"p_as":{P_AS},"seed":5}}"#),
    )
    .unwrap();
    fs::write(
        &train,
        format!(
            r#"{{"scheme":"crc","n":{N},"s":{S},"shuffle":"random","L":60,"p_hat":{P_HAT},"p_ss":{P_SS},"p_as":{P_AS},"seed":5,
                "model":"logistic","dataset":{{"synthetic":{{"N":400,"a":6,"noise":0.0}}}}}}"#
        ),
    )
    .unwrap();
    let analyze = analyze.to_str().unwrap();
    let train = train.to_str().unwrap();

    let commands: Vec<Vec<&str>> = vec![
        vec!["analyze", "--config", analyze, "--monte-carlo", "20000"],
        vec!["--seed", "11", "analyze", "--config", analyze, "--monte-carlo", "5000"],
        vec!["simulate", "--config", train],
        vec!["necklaces", "12", "6"],
        vec!["validate", "--max-n", "9"],
    ];
    let mut mismatches = Vec::new();
    for args in &commands {
        let reference = cli(args, "4");
        for threads in ["4", "1"] {
            if cli(args, threads) != reference {
                mismatches.push(format!("{} (threads {threads})", args.join(" ")));
            }
        }
    }
    let mut outputs = Vec::new();
    for (run, threads) in ["a", "b", "c"].iter().zip(["4", "4", "1"]) {
        let out = dir.path().join(run);
        cli(&["train", "--config", train, "--out", out.to_str().unwrap()], threads);
        outputs.push((fs::read(out.join("iterations.csv")).unwrap(), fs::read(out.join("summary.json")).unwrap()));
    }
    if outputs.iter().any(|o| *o != outputs[0]) {
        mismatches.push("train".to_string());
    }
    Outcome::new(
        mismatches.is_empty(),
        format!(
            "{} commands run twice with 4 threads and once with 1 thread; mismatches: {}",
            commands.len() + 1,
            if mismatches.is_empty() { "none".to_string() } else { mismatches.join(", ") }
        ),
    )
}

/// Plain full-batch gradient descent over the whole dataset.
struct CentralizedGd {
    task: Task,
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
    eta: f64,
    lambda: f64,
}

impl CentralizedGd {
    fn dot(x: &[f64], beta: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (a, b) in x.iter().zip(beta) {
            acc += a * b;
        }
        acc
    }

    fn sigmoid(z: f64) -> f64 {
        if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            z.exp() / (1.0 + z.exp())
        }
    }

    fn loss(&self, beta: &[f64]) -> f64 {
        let mut total = 0.0;
        for (x, &y) in self.features.iter().zip(&self.labels) {
            let z = Self::dot(x, beta);
            total += match self.task {
                Task::Linear => (z - y) * (z - y),
                Task::Logistic => z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z,
            };
        }
        total + 0.5 * self.lambda * Self::dot(beta, beta)
    }

    fn step(&self, beta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; beta.len()];
        for (x, &y) in self.features.iter().zip(&self.labels) {
            let z = Self::dot(x, beta);
            let c = match self.task {
                Task::Linear => 2.0 * (z - y),
                Task::Logistic => Self::sigmoid(z) - y,
            };
            for (gk, xk) in g.iter_mut().zip(x) {
                *gk += c * xk;
            }
        }
        for (gk, bk) in g.iter_mut().zip(beta) {
            *gk += self.lambda * bk;
        }
        beta.iter().zip(&g).map(|(b, gk)| b - self.eta * gk).collect()
    }
}

fn centralized_equality() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (task, eta) in [(Task::Linear, 2e-4), (Task::Logistic, 2e-3)] {
        let config = config_json(&format!(
            r#""scheme":"crc","n":{N},"s":{S},"shuffle":"none","L":100,"p_hat":{P_HAT},"p_ss":0.0,"p_as":0.0,"seed":3,
               "model":"{task}","eta":{eta},"lambda":0.5,"dataset":{{"synthetic":{{"N":800,"a":10,"noise":0.5}}}}"#
        ));
        let (data, beta_star) = config.load_dataset(Path::new(".")).unwrap();
        let oracle = CentralizedGd {
            task,
            features: (0..data.len()).map(|i| data.point(i).0.to_vec()).collect(),
            labels: (0..data.len()).map(|i| data.point(i).1).collect(),
            eta,
            lambda: 0.5,
        };
        let out = run_experiment(&config, data, beta_star).unwrap();
        let mut beta = vec![0.0; oracle.features[0].len()];
        let mut identical = out.records.len() == 100;
        for record in &out.records {
            beta = oracle.step(&beta);
            identical &= record.loss.to_bits() == oracle.loss(&beta).to_bits() && record.exact;
        }
        identical &= beta.iter().zip(&out.summary.final_beta).all(|(a, b)| a.to_bits() == b.to_bits());
        pass &= identical;
        notes.push(format!("{task}: bit-identical {identical}, final loss {:.10}", oracle.loss(&beta)));
    }
    Outcome::new(pass, format!("100 iterations; {}", notes.join("; ")))
}
