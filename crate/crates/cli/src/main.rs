mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use gcshuffle::analysis::{
    binomial, cycle_class_count, cycle_class_total, divisors, enumerate_cycle_representatives, expected_err_cond,
    expected_err_total, monte_carlo_err, monte_carlo_err_cond,
};
use gcshuffle::stragglers::WorkerClass;
use gcshuffle::training::{records_to_csv, run_experiment, simulate_access, ExperimentConfig};
use gcshuffle::validate::{run_validation, Targets, DEFAULT_MAX_N};
use num_bigint::BigUint;
use serde_json::json;

use output::{print_json, write_stdout, Failure};

const MAX_NECKLACE_N: usize = 24;

#[derive(Parser)]
#[command(name = "gcshuffle", version, about = "Gradient coding with shuffled straggler assignments")]
struct Cli {
    /// Overrides the seed given in the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected decoding error of a code under the configured straggler model.
    Analyze {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Also estimate the error by simulation with this many trials.
        #[arg(long = "monte-carlo", value_name = "TRIALS")]
        monte_carlo: Option<usize>,
    },
    /// Straggler and shuffle simulation without a model: access counts and decoding error.
    Simulate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Coded gradient descent; writes iterations.csv and summary.json.
    Train {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Cycle classes of length-n binary words of weight r.
    Necklaces { n: usize, r: usize },
    /// Checks the closed forms against exhaustive enumeration.
    Validate {
        #[arg(long = "max-n", value_name = "K", default_value_t = DEFAULT_MAX_N)]
        max_n: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { config, monte_carlo } => analyze(&config, cli.seed, monte_carlo),
        Command::Simulate { config } => simulate(&config, cli.seed),
        Command::Train { config, out } => train(&config, cli.seed, &out),
        Command::Necklaces { n, r } => necklaces(n, r),
        Command::Validate { max_n } => validate(max_n),
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> anyhow::Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = ExperimentConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

/// Number of slow workers when the config pins it, through labels or `m_fixed`.
fn fixed_slow_count(config: &ExperimentConfig) -> Option<usize> {
    match &config.labels {
        Some(labels) => Some(labels.iter().filter(|c| **c == WorkerClass::Slow).count()),
        None => config.m_fixed,
    }
}

fn analyze(path: &Path, seed: Option<u64>, trials: Option<usize>) -> Result<(), Failure> {
    let config = load_config(path, seed)?;
    let (n, s, p_ss, p_as) = (config.n, config.s, config.p_ss, config.p_as);
    let fixed_m = fixed_slow_count(&config);
    let report = match fixed_m {
        Some(m) => expected_err_cond(config.scheme, n, m, s, p_ss, p_as),
        None => expected_err_total(config.scheme, n, s, config.p_hat, p_ss, p_as),
    }
    .map_err(Failure::from_core)?;

    let mut value = serde_json::to_value(&report).map_err(anyhow::Error::from)?;
    value["exactness_violations"] = json!(report.exactness_violations());
    if let Some(trials) = trials {
        let params = config.params();
        let estimate = match fixed_m {
            Some(m) => monte_carlo_err_cond(config.scheme, n, m, s, &params, trials, config.seed),
            None => monte_carlo_err(config.scheme, n, s, &params, trials, config.seed),
        }
        .map_err(Failure::from_core)?;
        value["monte_carlo"] = json!({
            "estimate": estimate.estimate,
            "std_error": estimate.std_error,
            "trials": estimate.trials,
            "seed": config.seed,
        });
    }
    print_json(value)
}

fn simulate(path: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let config = load_config(path, seed)?;
    let sim = simulate_access(&config).map_err(Failure::from_core)?;
    let mut value = serde_json::to_value(&sim).map_err(anyhow::Error::from)?;
    value["seed"] = json!(config.seed);
    print_json(value)
}

fn train(path: &Path, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let config = load_config(path, seed)?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    let (data, beta_star) = config.load_dataset(base_dir).map_err(Failure::from_core)?;

    let output = run_experiment(&config, data, beta_star).map_err(Failure::from_core)?;
    let csv = records_to_csv(&output.records);
    let summary = output::rounded(serde_json::to_value(&output.summary).map_err(anyhow::Error::from)?);
    let summary = serde_json::to_string_pretty(&summary).map_err(anyhow::Error::from)? + "\n";

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let files = [(out.join("iterations.csv"), csv), (out.join("summary.json"), summary)];
    for (i, (file, contents)) in files.iter().enumerate() {
        if let Err(e) = fs::write(file, contents) {
            for (written, _) in &files[..=i] {
                let _ = fs::remove_file(written);
            }
            return Err(anyhow::Error::from(e).context(format!("writing {}", file.display())).into());
        }
    }
    log::info!("wrote {} iterations to {}", output.records.len(), out.display());
    Ok(())
}

fn necklaces(n: usize, r: usize) -> Result<(), Failure> {
    if n > MAX_NECKLACE_N || r > n {
        return Err(anyhow::anyhow!("need 0 <= r <= n <= {MAX_NECKLACE_N}, got n={n} r={r}").into());
    }
    let classes = enumerate_cycle_representatives(n, r).map_err(Failure::from_core)?;
    let mut out = String::from("bitstring,weight,order\n");
    for class in &classes {
        out.push_str(&format!("{},{},{}\n", class.bitstring(), class.weight(), class.order()));
    }
    let n_r = cycle_class_total(n, r).map_err(Failure::from_core)?;
    let weighted: BigUint = divisors(n)
        .into_iter()
        .map(|e| cycle_class_count(n, r, e).map(|c| c * BigUint::from(e)))
        .sum::<gcshuffle::Result<BigUint>>()
        .map_err(Failure::from_core)?;
    let total = binomial(n, r);
    let ok = weighted == total && BigUint::from(classes.len()) == n_r;
    out.push_str(&format!(
        "# N_r={n_r} listed={} sum_e e*N(r,e)={weighted} C({n},{r})={total} {}\n",
        classes.len(),
        if ok { "ok" } else { "MISMATCH" }
    ));
    write_stdout(&out)?;
    if !ok {
        return Err(anyhow::anyhow!("cycle class counts disagree").into());
    }
    Ok(())
}

fn validate(max_n: usize) -> Result<(), Failure> {
    let report = run_validation(max_n, &Targets::default()).map_err(Failure::from_core)?;
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        write_stdout(&format!("{status} {} ({} cases)\n", check.name, check.cases))?;
    }
    match report.first_counterexample() {
        None => Ok(()),
        Some(example) => Err(anyhow::anyhow!("validation failed; first counterexample: {example}").into()),
    }
}
