use std::fmt;
use std::io::{self, Write};

use gcshuffle::training::sig10;
use serde_json::Value;

/// A command failure, carrying the process exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad input, configuration, I/O or a failed check: exit code 1.
    Input(anyhow::Error),
    /// Non-finite values during a run: exit code 2.
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn from_core(e: gcshuffle::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.into())
        } else {
            Failure::Input(e.into())
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let numerical = e.chain().any(|c| c.downcast_ref::<gcshuffle::Error>().is_some_and(|g| g.is_numerical()));
        if numerical {
            Failure::Numerical(e)
        } else {
            Failure::Input(e)
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(e) | Failure::Numerical(e) => write!(f, "{e:#}"),
        }
    }
}

/// Rounds every floating-point number in `value` to 10 significant digits.
pub fn rounded(value: Value) -> Value {
    match value {
        Value::Number(num) if num.is_f64() => {
            let v = num.as_f64().expect("f64 number");
            serde_json::Number::from_f64(sig10(v)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(rounded).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

/// Pretty-prints `value` with sorted keys and rounded numbers.
pub fn print_json(value: Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(&rounded(value)).map_err(anyhow::Error::from)?;
    write_stdout(&(text + "\n"))
}

/// Writes to stdout, treating a closed pipe as success.
pub fn write_stdout(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(anyhow::Error::from(e).context("writing stdout").into()),
        _ => Ok(()),
    }
}
